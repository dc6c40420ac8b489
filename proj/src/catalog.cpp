#include "cropcast/catalog.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cropcast/error.hpp"
#include "cropcast/series.hpp"

namespace cropcast {

Scaler Scaler::of(const FeatureFrame& frame) {
    return Scaler{frame.mean, frame.scale, frame.price_mean, frame.price_scale};
}

ModelCatalog::ModelCatalog(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ValidationError("catalog capacity must be >= 1");
}

void ModelCatalog::put(CatalogEntry entry) {
    if (!entries_.empty() && entry.version <= entries_.back().version) {
        throw VersionError("catalog version " + std::to_string(entry.version) + " is not above " +
                           std::to_string(entries_.back().version));
    }
    entries_.push_back(std::move(entry));
    while (entries_.size() > capacity_) entries_.pop_front();
}

const CatalogEntry& ModelCatalog::best(Metric metric) const {
    if (entries_.empty()) throw EmptyCatalogError("catalog is empty");
    const CatalogEntry* best = nullptr;
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        const double v = it->metric(metric);
        if (best == nullptr) {
            best = &*it;
            continue;
        }
        const double b = best->metric(metric);
        if (!std::isnan(v) && (std::isnan(b) || v < b)) best = &*it;
    }
    return *best;
}

const CatalogEntry& ModelCatalog::newest() const {
    if (entries_.empty()) throw EmptyCatalogError("catalog is empty");
    return entries_.back();
}

namespace {

std::string number(double v) { return std::isnan(v) ? "nan" : format_number(v); }

double parse_number(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("bad number in catalog: " + s);
    return v;
}

std::string join(const Eigen::RowVectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out += ',';
        out += number(v[i]);
    }
    return out;
}

Eigen::RowVectorXd split(const std::string& s) {
    std::vector<double> vals;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) vals.push_back(parse_number(item));
    return Eigen::Map<const Eigen::RowVectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

const std::string& at(const Manifest& m, const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) throw Error("catalog manifest lacks '" + key + "'");
    return it->second;
}

std::string stem_name(std::uint64_t version) { return "v" + std::to_string(version); }

}  // namespace

void save_catalog(const std::filesystem::path& dir, const ModelCatalog& catalog) {
    std::filesystem::create_directories(dir);
    std::ofstream index(dir / "index", std::ios::trunc);
    if (!index) throw Error("cannot write catalog index in " + dir.string());
    index << "capacity=" << catalog.capacity() << '\n';
    for (const CatalogEntry& e : catalog.entries()) {
        Manifest extra;
        extra["version"] = std::to_string(e.version);
        extra["trained_through"] = format_date(e.trained_through);
        extra["validation_ar"] = number(e.validation_ar);
        extra["validation_am"] = number(e.validation_am);
        extra["trend_polarity"] = e.polarity ? std::string(to_string(*e.polarity)) : "none";
        std::size_t i = 0;
        for (const auto& [market, s] : e.scalers) {
            const std::string p = "scaler." + std::to_string(i++) + ".";
            extra[p + "market"] = market;
            extra[p + "mean"] = join(s.mean);
            extra[p + "scale"] = join(s.scale);
            extra[p + "price_mean"] = number(s.price_mean);
            extra[p + "price_scale"] = number(s.price_scale);
        }
        extra["scalers"] = std::to_string(e.scalers.size());
        save_model(dir / stem_name(e.version), *e.model, extra);
        index << e.version << '\n';
    }
}

ModelCatalog load_catalog(const std::filesystem::path& dir) {
    std::ifstream index(dir / "index");
    if (!index) throw Error("no catalog index in " + dir.string());
    std::string line;
    if (!std::getline(index, line) || line.rfind("capacity=", 0) != 0) {
        throw ParseError("expected capacity=<n>", 1);
    }
    ModelCatalog catalog(static_cast<std::size_t>(std::stoull(line.substr(9))));
    std::size_t n = 1;
    while (std::getline(index, line)) {
        ++n;
        if (line.empty()) continue;
        std::uint64_t version = 0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), version);
        if (ec != std::errc{} || ptr != line.data() + line.size()) throw ParseError("bad version", n);
        Manifest m;
        CatalogEntry e;
        e.model = std::make_shared<const Model>(load_model(dir / stem_name(version), &m));
        e.version = version;
        const auto day = parse_date(at(m, "trained_through"));
        if (!day) throw Error("bad trained_through in catalog entry " + std::to_string(version));
        e.trained_through = *day;
        e.validation_ar = parse_number(at(m, "validation_ar"));
        e.validation_am = parse_number(at(m, "validation_am"));
        const std::string& pol = at(m, "trend_polarity");
        if (pol != "none") e.polarity = pol == "positive" ? TrendPolarity::Positive : TrendPolarity::Negative;
        const auto count = std::stoull(at(m, "scalers"));
        for (std::size_t i = 0; i < count; ++i) {
            const std::string p = "scaler." + std::to_string(i) + ".";
            Scaler s{split(at(m, p + "mean")), split(at(m, p + "scale")), parse_number(at(m, p + "price_mean")),
                     parse_number(at(m, p + "price_scale"))};
            e.scalers.emplace(at(m, p + "market"), std::move(s));
        }
        catalog.put(std::move(e));
    }
    return catalog;
}

}  // namespace cropcast
