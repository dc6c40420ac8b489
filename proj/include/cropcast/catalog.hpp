#ifndef CROPCAST_CATALOG_HPP
#define CROPCAST_CATALOG_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "cropcast/calendar.hpp"
#include "cropcast/models.hpp"
#include "cropcast/stats.hpp"

namespace cropcast {

/// Maps raw feature rows to model inputs and model outputs back to currency.
struct Scaler {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;
    double price_mean = 0.0;
    double price_scale = 1.0;

    static Scaler of(const FeatureFrame& frame);
};

enum class Metric { Ar, Am };

struct CatalogEntry {
    std::uint64_t version = 0;
    std::shared_ptr<const Model> model;
    Day trained_through = 0;
    double validation_ar = std::numeric_limits<double>::quiet_NaN();
    double validation_am = std::numeric_limits<double>::quiet_NaN();
    std::optional<TrendPolarity> polarity;
    /// Keyed by market id; pooled models carry one scaler per market.
    std::map<std::string, Scaler> scalers;

    double metric(Metric m) const { return m == Metric::Am ? validation_am : validation_ar; }
};

/// Bounded, version-ordered store; the oldest version is evicted first.
class ModelCatalog {
public:
    static constexpr std::size_t kDefaultCapacity = 30;

    explicit ModelCatalog(std::size_t capacity = kDefaultCapacity);

    /// Throws VersionError unless entry.version exceeds every stored version.
    void put(CatalogEntry entry);

    /// Minimal validation metric, ties to the newest version. NaN metrics
    /// rank last. Throws EmptyCatalogError.
    const CatalogEntry& best(Metric metric = Metric::Ar) const;
    const CatalogEntry& newest() const;

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<CatalogEntry>& entries() const { return entries_; }

private:
    std::size_t capacity_;
    std::deque<CatalogEntry> entries_;
};

/// One manifest and parameter blob per entry plus an `index` file listing
/// versions, oldest first.
void save_catalog(const std::filesystem::path& dir, const ModelCatalog& catalog);
ModelCatalog load_catalog(const std::filesystem::path& dir);

}  // namespace cropcast

#endif  // CROPCAST_CATALOG_HPP
