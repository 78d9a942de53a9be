#include "adnpca/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "adnpca/io.hpp"

namespace adnpca {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::vector<PlotSeries>& series,
                          const std::vector<PlotMarker>& markers) {
    constexpr double width = 640, height = 360, left = 50, right = 20, top = 40, bottom = 40;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    double xmin = 0.0, xmax = 1.0;
    bool first = true;
    for (const auto& s : series) {
        for (double x : s.x) {
            if (first) {
                xmin = xmax = x;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << escape_xml(title) << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << left << "\" y=\"" << height - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">k = "
        << io::format_double(xmin) << "</text>\n";
    out << "<text x=\"" << left + pw << "\" y=\"" << height - 12
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">k = " << io::format_double(xmax)
        << "</text>\n";

    int legend = 0;
    for (const auto& s : series) {
        if (s.y.empty()) continue;
        const auto [lo_it, hi_it] = std::minmax_element(s.y.begin(), s.y.end());
        double lo = *lo_it, hi = *hi_it;
        if (hi == lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.y.size() && i < s.x.size(); ++i) {
            const double y = top + ph - (s.y[i] - lo) / (hi - lo) * ph;
            out << fixed(px(s.x[i]), 2) << ',' << fixed(y, 2) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 14 * legend << "\" fill=\"" << s.color
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(s.name) << " ["
            << fixed(*lo_it, 4) << ", " << fixed(*hi_it, 4) << "]</text>\n";
        ++legend;
    }
    for (const auto& m : markers) {
        const double x = px(m.x);
        out << "<line x1=\"" << fixed(x, 2) << "\" y1=\"" << top << "\" x2=\"" << fixed(x, 2) << "\" y2=\""
            << top + ph << "\" stroke=\"" << m.color << "\" stroke-dasharray=\"4 3\"/>\n";
        out << "<text x=\"" << fixed(x + 3, 2) << "\" y=\"" << top + ph - 6 << "\" fill=\"" << m.color
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(m.label) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string report_markdown(const std::string& category, const std::vector<ReportRow>& rows,
                            const std::vector<std::string>& heuristics) {
    std::ostringstream out;
    out << "## " << (category.empty() ? std::string("(unnamed)") : category) << "\n\n";
    out << "| stage | k_star | auroc(k_star) |";
    for (const auto& h : heuristics) out << ' ' << h << " k_tilde | " << h << " auroc | " << h << " regret |";
    out << "\n|---|---|---|";
    for (std::size_t i = 0; i < heuristics.size(); ++i) out << "---|---|---|";
    out << '\n';
    for (const auto& r : rows) {
        if (r.category != category) continue;
        out << "| " << r.stage << " | " << r.k_star << " | " << fixed(r.auroc_star, 4) << " |";
        for (const auto& h : heuristics) {
            auto it = r.by_heuristic.find(h);
            if (it == r.by_heuristic.end()) {
                out << " - | - | - |";
            } else {
                out << ' ' << it->second.k_tilde << " | " << fixed(it->second.auroc_tilde, 4) << " | "
                    << fixed(it->second.regret, 4) << " |";
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string report_csv(const std::vector<ReportRow>& rows, const std::vector<std::string>& heuristics) {
    std::ostringstream out;
    out << "category,stage,k_star,auroc_star";
    for (const auto& h : heuristics) out << ',' << h << "_k_tilde," << h << "_auroc," << h << "_regret";
    out << '\n';
    for (const auto& r : rows) {
        out << r.category << ',' << r.stage << ',' << r.k_star << ',' << io::format_double(r.auroc_star);
        for (const auto& h : heuristics) {
            auto it = r.by_heuristic.find(h);
            if (it == r.by_heuristic.end()) {
                out << ",,,";
            } else {
                out << ',' << it->second.k_tilde << ',' << io::format_double(it->second.auroc_tilde) << ','
                    << io::format_double(it->second.regret);
            }
        }
        out << '\n';
    }
    return out.str();
}

json report_json(const std::vector<ReportRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json entries = json::array();
        for (const auto& [name, e] : r.by_heuristic) entries.push_back(regret_to_json(e));
        arr.push_back({{"category", r.category},
                       {"stage", r.stage},
                       {"k_star", r.k_star},
                       {"auroc_star", r.auroc_star},
                       {"heuristics", entries}});
    }
    return {{"rows", arr}};
}

}  // namespace adnpca
