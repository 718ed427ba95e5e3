#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

namespace parvi::cli {
namespace {

double parse_real(std::string_view s, std::size_t line, const char* what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw CsvError(std::string("cannot parse ") + what + " '" + std::string(s) + "'", line);
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <std::size_t D>
void write_impl(std::ostream& os, const Trajectory<D>& traj) {
  os << "# kind=" << kind_name(kind_of<D>) << " N=" << traj.segments() << " h=" << format_real(traj.h)
     << " t0=" << format_real(traj.t0) << '\n';
  os << (D == 2 ? "t,x,y\n" : "t,x,y,vx,vy\n");
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << format_real(traj.time(k));
    for (std::size_t c = 0; c < D; ++c) os << ',' << format_real(traj.states[k][c]);
    os << '\n';
  }
}

template <std::size_t D>
Trajectory<D> read_rows(std::istream& is, std::size_t n_segments, double h, double t0, std::size_t& line) {
  Trajectory<D> traj;
  traj.h = h;
  traj.t0 = t0;
  std::string text;
  while (std::getline(is, text)) {
    ++line;
    if (text.empty() || text == "\r") continue;
    const auto fields = split(text, ',');
    if (fields.size() != D + 1)
      throw CsvError("expected " + std::to_string(D + 1) + " fields, found " + std::to_string(fields.size()), line);
    typename Trajectory<D>::State s;
    for (std::size_t c = 0; c < D; ++c) {
      s[c] = parse_real(fields[c + 1], line, "value");
      if (!std::isfinite(s[c])) throw CsvError("non-finite value", line);
    }
    (void)parse_real(fields[0], line, "time");
    traj.states.push_back(s);
  }
  if (traj.states.size() != n_segments + 1)
    throw CsvError("header declares N=" + std::to_string(n_segments) + " but file has " +
                       std::to_string(traj.states.size()) + " samples",
                   line);
  return traj;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const TrajectoryQ& traj) { write_impl(os, traj); }
void write_trajectory_csv(std::ostream& os, const TrajectoryTQ& traj) { write_impl(os, traj); }

AnyTrajectory read_trajectory_csv(std::istream& is) {
  std::size_t line = 0;
  std::string text;
  if (!std::getline(is, text)) throw CsvError("empty file", 1);
  ++line;
  if (text.empty() || text[0] != '#') throw CsvError("missing '# kind=... N=... h=... t0=...' header", line);
  std::string kind;
  long long n = -1;
  double h = 0.0, t0 = 0.0;
  bool have_h = false;
  std::istringstream header(text.substr(1));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw CsvError("malformed header token '" + token + "'", line);
    const std::string key = token.substr(0, eq);
    const std::string_view value = std::string_view(token).substr(eq + 1);
    if (key == "kind") {
      kind = value;
    } else if (key == "N") {
      const auto res = std::from_chars(value.data(), value.data() + value.size(), n);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size()) throw CsvError("bad N", line);
    } else if (key == "h") {
      h = parse_real(value, line, "h");
      have_h = true;
    } else if (key == "t0") {
      t0 = parse_real(value, line, "t0");
    }
  }
  if (kind != "Q" && kind != "TQ") throw CsvError("header kind must be Q or TQ", line);
  if (n < 1) throw CsvError("header N must be a positive integer", line);
  if (!have_h || !(h > 0.0)) throw CsvError("header h must be positive", line);

  if (!std::getline(is, text)) throw CsvError("missing column header", line + 1);
  ++line;
  if (!text.empty() && text.back() == '\r') text.pop_back();
  const std::string expected = kind == "Q" ? "t,x,y" : "t,x,y,vx,vy";
  if (text != expected) throw CsvError("column header must be '" + expected + "'", line);

  if (kind == "Q") return read_rows<2>(is, static_cast<std::size_t>(n), h, t0, line);
  return read_rows<4>(is, static_cast<std::size_t>(n), h, t0, line);
}

AnyTrajectory read_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trajectory file '" + path + "'");
  return read_trajectory_csv(in);
}

void write_residual_csv(std::ostream& os, const ResidualReport& report) {
  os << "iteration,max_residual,wall_seconds\n";
  for (std::size_t i = 0; i < report.max_residual.size(); ++i)
    os << i << ',' << format_real(report.max_residual[i]) << ',' << format_real(report.wall_seconds[i]) << '\n';
}

}  // namespace parvi::cli
