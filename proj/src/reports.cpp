#include "cropcast/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cropcast/error.hpp"

namespace cropcast {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw Error("cannot open " + file.string() + " for writing");
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string fixed(double v) {
    if (std::isnan(v)) return "";
    return num(v, 6);
}

void write_errors_csv(const std::filesystem::path& file, const EvaluationReport& report) {
    std::ofstream out = open_out(file);
    out << "issue_date,rmse,mape\n";
    for (const ForecastRecord& r : report.records) {
        out << format_date(r.issue_date) << ',';
        if (!r.failure) out << fixed(r.metrics.rmse) << ',' << fixed(r.metrics.mape);
        else out << ',';
        out << '\n';
    }
}

void write_ced_csv(const std::filesystem::path& file, const std::vector<CedPoint>& curve) {
    std::ofstream out = open_out(file);
    out << "threshold,fraction\n";
    for (const CedPoint& p : curve) out << fixed(p.threshold) << ',' << fixed(p.fraction) << '\n';
}

void write_summary_csv(const std::filesystem::path& file, const std::vector<EvaluationReport>& reports) {
    std::ofstream out = open_out(file);
    out << "strategy,market,ar,am,aoc\n";
    for (const EvaluationReport& r : reports) {
        out << csv_field(r.strategy) << ',' << csv_field(r.market_id) << ',' << fixed(r.ar) << ',' << fixed(r.am)
            << ',' << fixed(r.aoc) << '\n';
    }
}

void write_decisions_csv(const std::filesystem::path& file, const std::string& strategy,
                         const std::vector<DecisionRow>& rows) {
    std::ofstream out = open_out(file);
    out << "date,strategy,action,reason\n";
    for (const DecisionRow& r : rows) {
        out << format_date(r.date) << ',' << csv_field(strategy) << ',' << csv_field(r.action) << ','
            << csv_field(r.reason) << '\n';
    }
}

void write_quality_csv(const std::filesystem::path& file, const std::vector<QualityRow>& rows) {
    std::ofstream out = open_out(file);
    out << "market_id,crop_id,missing_fraction,outlier_fraction,max_consecutive_missing\n";
    for (const QualityRow& r : rows) {
        out << csv_field(r.market_id) << ',' << csv_field(r.crop_id) << ',' << fixed(r.report.missing_fraction) << ','
            << fixed(r.report.outlier_fraction) << ',' << r.report.max_consecutive_missing << '\n';
    }
}

void write_stats_csv(const std::filesystem::path& file, const std::vector<StatsRow>& rows) {
    std::ofstream out = open_out(file);
    out << "market_id,adf_stat,kpss_stat,classification,residual_mean,residual_std\n";
    for (const StatsRow& r : rows) {
        out << csv_field(r.market_id) << ',' << fixed(r.stationarity.adf.stat) << ','
            << fixed(r.stationarity.kpss.stat) << ',' << to_string(r.stationarity.classification) << ','
            << fixed(r.residual.mean) << ',' << fixed(r.residual.std) << '\n';
    }
}

void write_frame_csv(const std::filesystem::path& file, const FeatureFrame& frame, bool raw) {
    std::ofstream out = open_out(file);
    out << "date";
    for (const std::string& c : frame.columns) out << ',' << csv_field(c);
    out << '\n';
    const Eigen::MatrixXd& m = raw ? frame.raw : frame.values;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        out << format_date(frame.days[i]);
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << fixed(m(static_cast<Eigen::Index>(i), j));
        out << '\n';
    }
}

void write_line_svg(const std::filesystem::path& file, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotLine>& lines) {
    constexpr double width = 720, height = 420, left = 70, right = 160, top = 40, bottom = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const PlotLine& l : lines) {
        for (std::size_t i = 0; i < l.x.size() && i < l.y.size(); ++i) {
            if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i])) continue;
            x0 = std::min(x0, l.x[i]);
            x1 = std::max(x1, l.x[i]);
            y0 = std::min(y0, l.y[i]);
            y1 = std::max(y1, l.y[i]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

    std::ofstream out = open_out(file);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
        << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x0 + (x1 - x0) * t / 4.0;
        const double fy = y0 + (y1 - y0) * t / 4.0;
        out << "<text x=\"" << num(sx(fx)) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
            << num(fx, 1) << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << num(sy(fy) + 4) << "\" text-anchor=\"end\">" << num(fy, 2)
            << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
        << xml_escape(x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(y_label) << "</text>\n";
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const PlotLine& l = lines[k];
        const char* colour = palette[k % std::size(palette)];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < l.x.size() && i < l.y.size(); ++i) {
            if (std::isfinite(l.x[i]) && std::isfinite(l.y[i])) out << num(sx(l.x[i])) << ',' << num(sy(l.y[i])) << ' ';
        }
        out << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(k);
        out << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << width - right + 30
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << width - right + 36 << "\" y=\"" << ly << "\">" << xml_escape(l.label) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace cropcast
