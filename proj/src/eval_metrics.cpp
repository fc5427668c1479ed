#include "ieqa/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace ieqa {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("correlation inputs differ in length");
  if (x.size() < 2)
    throw std::invalid_argument("correlation requires at least two points");
}

bool constant(std::span<const double> x) {
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  return *mn == *mx;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x <= 0.0 || var_y <= 0.0)
    throw degenerate_error("zero variance in correlation input");
  double r = cov / std::sqrt(var_x * var_y);
  // 1-ulp overshoot is expected; anything larger is a logic error
  if (std::abs(r) > 1.0 + 1e-9)
    throw std::logic_error("correlation left [-1, 1]");
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double plcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  if (constant(x) || constant(y))
    throw degenerate_error("constant vector in plcc input");
  return pearson(x, y);
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    // tie group [i, j]: everyone gets the mean of ranks i+1 .. j+1
    const double rank = static_cast<double>(i + j) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double srcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  if (constant(x) || constant(y))
    throw degenerate_error("constant vector in srcc input (all ranks tied)");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

bool CorrelationReport::complete() const {
  for (const auto& row : cells)
    for (const auto& cell : row)
      if (!cell.has_value()) return false;
  return s_in.has_value() && s_out.has_value() && final.has_value();
}

CorrelationReport final_score(
    const std::array<std::array<DimCorr, 2>, kDimensionCount>& cells) {
  CorrelationReport report;
  double sums[2] = {0.0, 0.0};
  for (int d = 0; d < kDimensionCount; ++d) {
    for (int s = 0; s < 2; ++s) {
      const DimCorr& c = cells[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
      report.cells[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)] = c;
      sums[s] += (c.srcc + c.plcc) / 2.0;
    }
  }
  report.s_in = sums[0] / static_cast<double>(kDimensionCount);
  report.s_out = sums[1] / static_cast<double>(kDimensionCount);
  report.final = 0.7 * *report.s_in + 0.3 * *report.s_out;
  return report;
}

CorrelationReport partial_report(
    const std::array<std::array<std::optional<DimCorr>, 2>, kDimensionCount>&
        cells) {
  CorrelationReport report;
  report.cells = cells;
  double sums[2] = {0.0, 0.0};
  bool have[2] = {true, true};
  for (int s = 0; s < 2; ++s) {
    for (int d = 0; d < kDimensionCount; ++d) {
      const auto& cell = cells[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
      if (!cell.has_value()) {
        have[s] = false;
        break;
      }
      sums[s] += (cell->srcc + cell->plcc) / 2.0;
    }
  }
  if (have[0]) report.s_in = sums[0] / static_cast<double>(kDimensionCount);
  if (have[1]) report.s_out = sums[1] / static_cast<double>(kDimensionCount);
  if (report.s_in && report.s_out)
    report.final = 0.7 * *report.s_in + 0.3 * *report.s_out;
  return report;
}

namespace {

constexpr std::array<Dimension, kDimensionCount> kDimensions{
    Dimension::visual, Dimension::editing, Dimension::preservation};

nlohmann::ordered_json cell_json(const std::optional<DimCorr>& cell) {
  if (!cell.has_value()) return {{"srcc", nullptr}, {"plcc", nullptr}};
  return {{"srcc", cell->srcc}, {"plcc", cell->plcc}};
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  if (!v.has_value()) return nullptr;
  return *v;
}

}  // namespace

std::string report_to_json(const CorrelationReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json dims;
  for (int d = 0; d < kDimensionCount; ++d) {
    nlohmann::ordered_json entry;
    entry["in"] = cell_json(report.cells[static_cast<std::size_t>(d)][0]);
    entry["out"] = cell_json(report.cells[static_cast<std::size_t>(d)][1]);
    dims[std::string(to_label(kDimensions[static_cast<std::size_t>(d)]))] = entry;
  }
  j["dimensions"] = std::move(dims);
  j["s_in"] = opt_json(report.s_in);
  j["s_out"] = opt_json(report.s_out);
  j["final"] = opt_json(report.final);
  return j.dump(2);
}

CorrelationReport report_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  CorrelationReport report;
  for (int d = 0; d < kDimensionCount; ++d) {
    const auto& entry =
        j.at("dimensions").at(std::string(to_label(kDimensions[static_cast<std::size_t>(d)])));
    const char* splits[2] = {"in", "out"};
    for (int s = 0; s < 2; ++s) {
      const auto& cell = entry.at(splits[s]);
      if (cell.at("srcc").is_null()) continue;
      report.cells[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)] =
          DimCorr{cell.at("srcc").get<double>(), cell.at("plcc").get<double>()};
    }
  }
  if (!j.at("s_in").is_null()) report.s_in = j.at("s_in").get<double>();
  if (!j.at("s_out").is_null()) report.s_out = j.at("s_out").get<double>();
  if (!j.at("final").is_null()) report.final = j.at("final").get<double>();
  return report;
}

std::string report_table(const CorrelationReport& report) {
  std::ostringstream out;
  auto fmt = [](const std::optional<double>& v) {
    if (!v.has_value()) return std::string("   n/a");
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%6.4f", *v);
    return std::string(buf);
  };
  out << "dimension      split   srcc    plcc\n";
  for (int d = 0; d < kDimensionCount; ++d) {
    const char* splits[2] = {"in ", "out"};
    for (int s = 0; s < 2; ++s) {
      const auto& cell = report.cells[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
      std::optional<double> srcc_v, plcc_v;
      if (cell) {
        srcc_v = cell->srcc;
        plcc_v = cell->plcc;
      }
      char name[16];
      std::snprintf(name, sizeof(name), "%-14s",
                    std::string(to_label(kDimensions[static_cast<std::size_t>(d)])).c_str());
      out << name << " " << splits[s] << "    " << fmt(srcc_v) << "  " << fmt(plcc_v)
          << "\n";
    }
  }
  out << "s_in " << fmt(report.s_in) << "   s_out " << fmt(report.s_out)
      << "   final " << fmt(report.final) << "\n";
  return out.str();
}

}  // namespace ieqa
