#include "blowup/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

namespace blowup {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t k = 0; k < header.size(); ++k) s += (k ? "," : "") + header[k];
  s += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw InvalidArgument("csv row width differs from header");
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) s += ',';
      s += format_double(row[k]);
    }
    s += '\n';
  }
  write_text(path, s);
}

std::string sha256_file(const fs::path& path) {
  const std::string data = read_text(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed for " + path.string());
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series, const std::string& timestamp) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
    << W << ' ' << H << "\">\n";
  if (!timestamp.empty()) o << "<!-- generated " << escape(timestamp) << " -->\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double sx = nice_step(x1 - x0), sy = nice_step(y1 - y0);
  for (double v = std::ceil(x0 / sx) * sx; v <= x1 + 1e-9 * sx; v += sx)
    o << "<text x=\"" << fmt("%.2f", px(v)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << fmt("%g", std::abs(v) < 1e-12 * sx ? 0.0 : v) << "</text>\n";
  for (double v = std::ceil(y0 / sy) * sy; v <= y1 + 1e-9 * sy; v += sy)
    o << "<text x=\"" << L - 6 << "\" y=\"" << fmt("%.2f", py(v) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
      << fmt("%g", std::abs(v) < 1e-12 * sy ? 0.0 : v) << "</text>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(xlabel)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
    << H / 2 << ")\">" << escape(ylabel) << "</text>\n";

  int legend = 0;
  for (const auto& s : series) {
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"";
    bool first = true;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      o << (first ? "" : " ") << fmt("%.2f", px(s.x[k])) << ',' << fmt("%.2f", py(s.y[k]));
      first = false;
    }
    o << "\"/>\n";
    if (!s.label.empty()) {
      const double ly = T + 16 + 16 * legend++;
      o << "<line x1=\"" << W - R - 130 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R - 110 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
      o << "<text x=\"" << W - R - 105 << "\" y=\"" << ly << "\" font-size=\"11\">" << escape(s.label)
        << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

void dump_field_csv(const fs::path& path, const SolveOutcome& outcome, int every) {
  if (every < 1) throw InvalidArgument("dump stride must be >= 1");
  const WaveField& f = outcome.field;
  const Grid& g = f.grid();
  std::string s = "t,x,u\n";
  for (int n = 0; n < f.levels(); n += every)
    for (int i = 0; i < g.nx; ++i) {
      if (!f.valid(n, i)) continue;
      s += format_double(f.t(n)) + ',' + format_double(g.x(i)) + ',' + format_double(f.u(n, i)) + '\n';
    }
  write_text(path, s);
}

void dump_field_binary(const fs::path& header, const fs::path& bin, const SolveOutcome& outcome, int every) {
  static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");
  if (every < 1) throw InvalidArgument("dump stride must be >= 1");
  const WaveField& f = outcome.field;
  const Grid& g = f.grid();
  std::vector<int> levels;
  for (int n = 0; n < f.levels(); n += every) levels.push_back(n);
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw Error("cannot write " + bin.string());
  std::vector<double> row(g.nx);
  for (int n : levels) {
    for (int i = 0; i < g.nx; ++i) row[i] = f.valid(n, i) ? f.u(n, i) : std::numeric_limits<double>::quiet_NaN();
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw Error("write failed for " + bin.string());

  nlohmann::json j;
  j["format"] = "float64-le";
  j["layout"] = "level-major: value of (level k, node i) at offset 8 * (k * nx + i)";
  j["file"] = bin.filename().string();
  j["nx"] = g.nx;
  j["x_min"] = g.x_min;
  j["h"] = g.h;
  j["t0"] = f.t0();
  j["levels"] = levels;
  j["invalid"] = "NaN";
  write_text(header, j.dump(2) + "\n");
}

}  // namespace blowup
