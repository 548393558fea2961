#include "circflow/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include <fmt/format.h>

namespace circflow {

std::string_view to_string(DetectionFormat format) {
  return format == DetectionFormat::MotCsv ? "mot-csv" : "points-csv";
}

DetectionFormat parse_detection_format(std::string_view text) {
  if (text == "mot-csv") return DetectionFormat::MotCsv;
  if (text == "points-csv") return DetectionFormat::PointsCsv;
  throw std::invalid_argument(fmt::format("unknown detection format '{}' (expected mot-csv or points-csv)", text));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    pos = line.find_first_not_of(" \t\r", pos);
    if (pos == std::string_view::npos) break;
    const auto end = line.find_first_of(" \t\r", pos);
    out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end;
  }
  return out;
}

template <typename T>
bool try_parse(std::string_view token, T& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return false;
  if constexpr (std::is_floating_point_v<T>) return std::isfinite(value);
  return true;
}

struct LineContext {
  std::string_view source;
  std::size_t line = 0;

  [[noreturn]] void fail(std::string_view message) const {
    throw std::invalid_argument(fmt::format("{}:{}: {}", source, line, message));
  }
  template <typename T>
  T parse(std::string_view token, std::string_view what) const {
    T value{};
    if (!try_parse(token, value)) fail(fmt::format("invalid {} '{}'", what, token));
    return value;
  }
};

bool is_skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

std::vector<Detection> read_detections(std::istream& in, DetectionFormat format, std::string_view source) {
  std::vector<Detection> out;
  std::string raw;
  LineContext ctx{source, 0};
  bool header_allowed = true;
  while (std::getline(in, raw)) {
    ++ctx.line;
    if (is_skippable(raw)) continue;
    const auto fields = split(raw, ',');
    double probe = 0.0;
    if (header_allowed && !try_parse(fields.front(), probe)) {
      header_allowed = false;
      continue;
    }
    header_allowed = false;

    Detection d;
    d.id = static_cast<std::int64_t>(out.size());
    if (format == DetectionFormat::MotCsv) {
      if (fields.size() < 7) ctx.fail(fmt::format("expected at least 7 fields, got {}", fields.size()));
      d.frame = ctx.parse<std::int32_t>(fields[0], "frame");
      const auto x = ctx.parse<double>(fields[2], "x");
      const auto y = ctx.parse<double>(fields[3], "y");
      const auto w = ctx.parse<double>(fields[4], "width");
      const auto h = ctx.parse<double>(fields[5], "height");
      const auto conf = ctx.parse<double>(fields[6], "confidence");
      d.position = {x + w / 2.0, y + h / 2.0};
      d.beta = 1.0 - std::clamp(conf, 0.0, 1.0);
    } else {
      if (fields.size() != 3 && fields.size() != 4) {
        ctx.fail(fmt::format("expected 3 or 4 fields, got {}", fields.size()));
      }
      d.frame = ctx.parse<std::int32_t>(fields[0], "frame");
      for (std::size_t k = 1; k < fields.size(); ++k) d.position.push_back(ctx.parse<double>(fields[k], "coordinate"));
    }
    if (!out.empty() && out.front().position.size() != d.position.size()) {
      ctx.fail("position dimension differs from earlier rows");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detection> load_detections(const std::filesystem::path& path, DetectionFormat format) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open detection file '{}'", path.string()));
  return read_detections(in, format, path.string());
}

void write_trajectories(std::ostream& out, const TrajectorySet& set, std::span<const Detection> detections) {
  std::size_t dim = 2;
  for (const Detection& d : detections) dim = std::max(dim, d.position.size());
  dim = std::min<std::size_t>(dim, 3);

  TrajectorySet sorted = set;
  sort_canonically(sorted, detections);
  out << (dim == 3 ? "track_id,frame,detection_id,x,y,z\n" : "track_id,frame,detection_id,x,y\n");
  for (std::size_t track = 0; track < sorted.size(); ++track) {
    for (std::size_t i : sorted.trajectories[track].detections) {
      const Detection& d = detections[i];
      std::string row = fmt::format("{},{},{}", track, d.frame, d.id);
      for (std::size_t k = 0; k < dim; ++k) row += fmt::format(",{}", k < d.position.size() ? d.position[k] : 0.0);
      out << row << '\n';
    }
  }
}

void write_graph_dump(std::ostream& out, const CirculationNetwork& net) {
  out << fmt::format("{} {}\n", net.node_count(), net.arc_count());
  for (const Arc& a : net.arcs()) out << fmt::format("{} {} {} {}\n", a.tail, a.head, a.cost, to_string(a.kind));
}

CirculationNetwork read_graph_dump(std::istream& in, std::string_view source) {
  std::string raw;
  LineContext ctx{source, 0};
  NodeId n = -1;
  std::int64_t m = -1;
  std::vector<Arc> arcs;
  while (std::getline(in, raw)) {
    ++ctx.line;
    if (is_skippable(raw)) continue;
    const auto t = tokens(raw);
    if (n < 0) {
      if (t.size() != 2) ctx.fail("header must be 'n m'");
      n = ctx.parse<NodeId>(t[0], "node count");
      m = ctx.parse<std::int64_t>(t[1], "arc count");
      if (n < 1) ctx.fail("node count must be at least 1");
      if (m < 0) ctx.fail("arc count must be non-negative");
      continue;
    }
    if (t.size() != 4) ctx.fail("arc line must be 'tail head cost kind'");
    Arc a;
    a.tail = ctx.parse<NodeId>(t[0], "tail");
    a.head = ctx.parse<NodeId>(t[1], "head");
    a.cost = ctx.parse<Cost>(t[2], "cost");
    const auto kind = parse_arc_kind(t[3]);
    if (!kind) ctx.fail(fmt::format("unknown arc kind '{}'", t[3]));
    a.kind = *kind;
    if (a.tail < 0 || a.tail >= n || a.head < 0 || a.head >= n) ctx.fail("arc endpoint outside the node range");
    if (static_cast<std::int64_t>(arcs.size()) == m) ctx.fail(fmt::format("more than the declared {} arcs", m));
    arcs.push_back(a);
  }
  if (n < 0) throw std::invalid_argument(fmt::format("{}: missing 'n m' header", source));
  if (static_cast<std::int64_t>(arcs.size()) != m) {
    throw std::invalid_argument(fmt::format("{}: declared {} arcs, found {}", source, m, arcs.size()));
  }
  if ((n - 1) % 2 != 0) {
    throw std::invalid_argument(fmt::format("{}: node count {} is not of the form 2k+1", source, n));
  }
  return CirculationNetwork::from_arcs(n, std::move(arcs));
}

std::map<std::string, std::string> read_key_values(std::istream& in, std::string_view source) {
  std::map<std::string, std::string> out;
  std::string raw;
  LineContext ctx{source, 0};
  while (std::getline(in, raw)) {
    ++ctx.line;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) ctx.fail("expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) ctx.fail("empty key");
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

QuadraticObjective read_objective(std::istream& in, std::vector<double> base_linear, std::string_view source) {
  std::vector<QuadraticTerm> quadratic;
  std::string raw;
  LineContext ctx{source, 0};
  const auto arcs = static_cast<ArcId>(base_linear.size());
  auto arc_index = [&](std::string_view token) {
    const auto a = ctx.parse<ArcId>(token, "arc index");
    if (a < 0 || a >= arcs) ctx.fail(fmt::format("arc index {} outside [0, {})", a, arcs));
    return a;
  };
  while (std::getline(in, raw)) {
    ++ctx.line;
    if (is_skippable(raw)) continue;
    const auto t = tokens(raw);
    if (t.size() == 2) {
      base_linear[static_cast<std::size_t>(arc_index(t[0]))] = ctx.parse<double>(t[1], "value");
    } else if (t.size() == 3) {
      const ArcId a = arc_index(t[0]);
      const ArcId b = arc_index(t[1]);
      quadratic.push_back({a, b, ctx.parse<double>(t[2], "value")});
    } else {
      ctx.fail("expected 'arc value' or 'arc arc value'");
    }
  }
  return QuadraticObjective(std::move(base_linear), std::move(quadratic));
}

}  // namespace circflow
