#include "sadq/ocloud/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "sadq/common/error.hpp"
#include "sadq/common/rng.hpp"

namespace sadq {
namespace {

double parse_field(const std::string& text, std::size_t line, const char* column) {
  std::size_t begin = text.find_first_not_of(" \t\r");
  std::size_t end = text.find_last_not_of(" \t\r");
  if (begin == std::string::npos) {
    fail(ErrorKind::kParseError, "line " + std::to_string(line) + ": empty " + column);
  }
  double value = 0.0;
  const char* first = text.data() + begin;
  const char* last = text.data() + end + 1;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    fail(ErrorKind::kParseError, "line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
  }
  return value;
}

}  // namespace

std::int64_t demand_units(double fraction) {
  return std::clamp<std::int64_t>(std::llround(fraction * kDemandScale), 1, kDemandScale);
}

std::vector<TaskRequest> trace_load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open trace " + path.string());

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kEmptyTrace, path.string() + " has no header");

  std::vector<TaskRequest> tasks;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 4) {
      fail(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": expected 4 columns, got " +
                                       std::to_string(fields.size()));
    }
    const double arrival = parse_field(fields[0], line_no, "arrival_time");
    const double duration = parse_field(fields[1], line_no, "duration");
    const double cpu = parse_field(fields[2], line_no, "cpu_demand");
    const double ram = parse_field(fields[3], line_no, "ram_demand");
    if (arrival < 0.0) fail(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": negative arrival_time");
    if (duration <= 0.0) fail(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": duration must be > 0");
    if (cpu <= 0.0) fail(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": cpu_demand must be > 0");
    if (ram <= 0.0) fail(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": ram_demand must be > 0");

    TaskRequest t;
    t.t_arr = static_cast<std::int64_t>(std::floor(arrival));
    t.t_occ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(duration)));
    t.c_req = static_cast<double>(demand_units(std::min(cpu, 1.0))) / kDemandScale;
    t.r_req = static_cast<double>(demand_units(std::min(ram, 1.0))) / kDemandScale;
    tasks.push_back(t);
  }
  if (tasks.empty()) fail(ErrorKind::kEmptyTrace, path.string() + " contains no tasks");
  std::stable_sort(tasks.begin(), tasks.end(),
                   [](const TaskRequest& a, const TaskRequest& b) { return a.t_arr < b.t_arr; });
  return tasks;
}

std::vector<TaskRequest> trace_synthesize(std::uint64_t seed, std::size_t count, double mean_interarrival) {
  Rng rng(seed);
  std::vector<TaskRequest> tasks;
  tasks.reserve(count);
  double clock = 0.0;
  // Demands are drawn on the 1e-6 grid in (0.05, 0.5].
  const auto draw_demand = [&rng] {
    const auto units = 500'000 - static_cast<std::int64_t>(rng.index(450'000));
    return static_cast<double>(units) / kDemandScale;
  };
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) clock += rng.exponential(mean_interarrival);
    TaskRequest t;
    t.t_arr = static_cast<std::int64_t>(std::floor(clock));
    t.c_req = draw_demand();
    t.r_req = draw_demand();
    t.t_occ = 1 + static_cast<std::int64_t>(rng.index(20));
    tasks.push_back(t);
  }
  return tasks;
}

}  // namespace sadq
