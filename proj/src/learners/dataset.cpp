#include "rrt/learners/dataset.hpp"

#include "rrt/errors.hpp"

namespace rrt {

void Dataset::validate() const {
    if (features.rows() < 1 || features.cols() < 1) throw DataError("dataset: needs at least one row and one column");
    if (targets.size() != features.rows()) throw DataError("dataset: target length differs from row count");
    if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(features.cols())) {
        throw DataError("dataset: feature name count differs from column count");
    }
    if (!features.allFinite() || !targets.allFinite()) throw DataError("dataset: non-finite value");
}

Dataset Dataset::from_panel(const PredictorPanel& panel, std::span<const std::size_t> rows,
                            const std::vector<double>& target) {
    Dataset d;
    d.feature_names = panel.feature_names;
    d.features.resize(static_cast<Eigen::Index>(rows.size()), panel.features.cols());
    d.targets.resize(static_cast<Eigen::Index>(rows.size()));
    Eigen::Index k = 0;
    for (std::size_t r : rows) {
        d.features.row(k) = panel.features.row(static_cast<Eigen::Index>(r));
        d.targets(k) = target[r];
        ++k;
    }
    return d;
}

Dataset Dataset::from_panel(const PredictorPanel& panel, RowRange rows, const std::vector<double>& target) {
    Dataset d;
    d.feature_names = panel.feature_names;
    const auto b = static_cast<Eigen::Index>(rows.begin);
    const auto n = static_cast<Eigen::Index>(rows.size());
    d.features = panel.features.middleRows(b, n);
    d.targets = Eigen::Map<const Eigen::VectorXd>(target.data() + rows.begin, n);
    return d;
}

}  // namespace rrt
