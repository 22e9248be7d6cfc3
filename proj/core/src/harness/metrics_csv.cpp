#include "gdmopt/harness/metrics_csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "gdmopt/error.hpp"
#include "gdmopt/io.hpp"

namespace gdmopt::harness {

namespace {

constexpr std::array<std::string_view, 8> kBase = {"epoch",      "reward_mean", "reward_std", "gap_mean",
                                                   "actor_loss", "critic_loss", "sigma",      "wall_ms"};

void put(std::string& out, const std::optional<double>& v) {
  out.push_back(',');
  if (!v) return;
  if (!std::isfinite(*v)) throw Error(ErrorCode::kNonFinite, "metrics value is not finite");
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *v);
  out.append(buf.data(), res.ptr);
}

std::optional<double> cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kIntegrity, "metrics cell '" + s + "' is not a number");
  }
  return v;
}

}  // namespace

std::vector<std::string> metrics_columns(bool episode_return) {
  std::vector<std::string> cols(kBase.begin(), kBase.end());
  if (episode_return) cols.emplace_back("episode_return");
  return cols;
}

std::string format_metrics_csv(const std::vector<MetricsRow>& rows, bool episode_return) {
  std::string out = "# metrics_schema=" + std::to_string(kMetricsSchemaVersion) + "\n";
  const auto cols = metrics_columns(episode_return);
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MetricsRow& r = rows[i];
    if (i > 0 && r.epoch <= prev) throw Error(ErrorCode::kInvalidArgument, "metrics epochs must strictly increase");
    prev = r.epoch;
    out += std::to_string(r.epoch);
    put(out, r.reward_mean);
    put(out, r.reward_std);
    put(out, r.gap_mean);
    put(out, r.actor_loss);
    put(out, r.critic_loss);
    put(out, r.sigma);
    put(out, r.wall_ms);
    if (episode_return) put(out, r.episode_return);
    out += "\n";
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "# metrics_schema=" + std::to_string(kMetricsSchemaVersion)) {
    throw Error(ErrorCode::kSchemaVersion, "metrics CSV lacks '# metrics_schema=" +
                                               std::to_string(kMetricsSchemaVersion) + "' on its first line");
  }
  if (!std::getline(in, line)) throw Error(ErrorCode::kIntegrity, "metrics CSV has no header");
  bool episode_return = false;
  for (bool er : {false, true}) {
    const auto cols = metrics_columns(er);
    std::string header;
    for (std::size_t i = 0; i < cols.size(); ++i) header += (i ? "," : "") + cols[i];
    if (header == line) {
      episode_return = er;
      break;
    }
    if (er) throw Error(ErrorCode::kIntegrity, "unexpected metrics header '" + line + "'");
  }
  const std::size_t ncols = metrics_columns(episode_return).size();

  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string c;
    std::istringstream ls(line);
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != ncols) throw Error(ErrorCode::kIntegrity, "metrics row has the wrong number of cells");
    MetricsRow r;
    const auto epoch = cell(cells[0]);
    if (!epoch) throw Error(ErrorCode::kIntegrity, "metrics row lacks an epoch");
    r.epoch = static_cast<std::int64_t>(*epoch);
    if (!rows.empty() && r.epoch <= rows.back().epoch) {
      throw Error(ErrorCode::kIntegrity, "metrics epochs must strictly increase");
    }
    r.reward_mean = cell(cells[1]);
    r.reward_std = cell(cells[2]);
    r.gap_mean = cell(cells[3]);
    r.actor_loss = cell(cells[4]);
    r.critic_loss = cell(cells[5]);
    r.sigma = cell(cells[6]);
    r.wall_ms = cell(cells[7]);
    if (episode_return) r.episode_return = cell(cells[8]);
    rows.push_back(r);
  }
  return rows;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows, bool episode_return) {
  write_file_atomic(path, format_metrics_csv(rows, episode_return));
}

}  // namespace gdmopt::harness
