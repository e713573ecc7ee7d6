#include "sntk/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sntk {

std::string format_shortest(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_17g(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_checkpoint(std::ostream& os, const RnnModel& model) {
  model.validate();
  const int n = model.N();
  os << "rnn N=" << n << " readout=" << model.readout[0] << "," << model.readout[1] << "\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) os << (j ? " " : "") << format_shortest(model.W(i, j));
    os << "\n";
  }
  for (int i = 0; i < n; ++i) os << (i ? " " : "") << format_shortest(model.b[i]);
  os << "\n";
}

namespace {

double parse_double(const std::string& token) {
  double value = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw std::runtime_error("checkpoint: malformed number '" + token + "'");
  return value;
}

Vector parse_row(std::istream& is, int n, const char* what) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(std::string("checkpoint: missing ") + what);
  std::istringstream row(line);
  Vector v(n);
  std::string token;
  int count = 0;
  while (row >> token) {
    if (count >= n) throw std::runtime_error(std::string("checkpoint: too many values in ") + what);
    v[count++] = parse_double(token);
  }
  if (count != n) throw std::runtime_error(std::string("checkpoint: too few values in ") + what);
  return v;
}

}  // namespace

RnnModel read_checkpoint(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("checkpoint: empty input");
  int n = 0, r0 = -1, r1 = -1;
  if (std::sscanf(header.c_str(), "rnn N=%d readout=%d,%d", &n, &r0, &r1) != 3 || n < 1)
    throw std::runtime_error("checkpoint: bad header '" + header + "'");
  Matrix W(n, n);
  for (int i = 0; i < n; ++i) W.row(i) = parse_row(is, n, "weight row").transpose();
  Vector b = parse_row(is, n, "bias row");
  return RnnModel(std::move(W), std::move(b), {r0, r1});
}

void save_checkpoint(const std::filesystem::path& path, const RnnModel& model) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(os, model);
}

RnnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(is);
}

}  // namespace sntk
