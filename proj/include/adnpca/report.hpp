#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adnpca/eval.hpp"
#include "adnpca/heuristics.hpp"

namespace adnpca {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
};

struct PlotMarker {
    double x = 0.0;
    std::string label;
    std::string color = "#d62728";
};

/// Minimal standalone SVG line chart. Every series is min-max scaled to the
/// panel, so curves with different units can share one plot.
std::string svg_line_plot(const std::string& title, const std::vector<PlotSeries>& series,
                          const std::vector<PlotMarker>& markers = {});

/// One row of the consolidated table: a (category, stage) sweep and the
/// regret of every heuristic evaluated on it.
struct ReportRow {
    std::string category;
    int stage = 0;
    Index k_star = 0;
    double auroc_star = 0.0;
    std::map<std::string, RegretEntry> by_heuristic;
};

std::string report_markdown(const std::string& category, const std::vector<ReportRow>& rows,
                            const std::vector<std::string>& heuristics);
std::string report_csv(const std::vector<ReportRow>& rows, const std::vector<std::string>& heuristics);
nlohmann::json report_json(const std::vector<ReportRow>& rows);

}  // namespace adnpca
