#include "freelab/spectrum.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "freelab/errors.hpp"

namespace freelab {

std::vector<double> SpectralSample::sorted_moduli() const {
  std::vector<double> out;
  out.reserve(eigenvalues.size());
  for (const auto& z : eigenvalues) out.push_back(std::abs(z));
  std::sort(out.begin(), out.end());
  return out;
}

void write_spectrum_csv(std::ostream& out, const SpectralSample& sample) {
  out << "re,im\n";
  for (const auto& z : sample.eigenvalues) fmt::print(out, "{:.17g},{:.17g}\n", z.real(), z.imag());
}

SpectralSample read_spectrum_csv(std::istream& in) {
  SpectralSample sample;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty spectrum CSV", 0);
  if (line.rfind("re,im", 0) != 0) throw ParseError("spectrum CSV must start with header 're,im'", 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("spectrum CSV line " + std::to_string(line_no) + " lacks a comma", 0);
    }
    try {
      std::size_t used_re = 0, used_im = 0;
      const double re = std::stod(line.substr(0, comma), &used_re);
      const double im = std::stod(line.substr(comma + 1), &used_im);
      sample.eigenvalues.emplace_back(re, im);
    } catch (const std::logic_error&) {
      throw ParseError("spectrum CSV line " + std::to_string(line_no) + " is not numeric", comma);
    }
  }
  sample.source = "csv";
  return sample;
}

}  // namespace freelab
