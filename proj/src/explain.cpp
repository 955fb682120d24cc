#include "rrt/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "rrt/csv.hpp"
#include "rrt/errors.hpp"
#include "rrt/parallel.hpp"
#include "rrt/random.hpp"

namespace rrt {

namespace {

double binomial(std::size_t n, std::size_t k) {
    return std::exp(std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0));
}

struct Coalition {
    std::vector<char> mask;
    double weight;
};

std::vector<Coalition> enumerate_coalitions(std::size_t M) {
    std::vector<Coalition> out;
    const std::uint64_t full = (std::uint64_t{1} << M) - 1;
    for (std::uint64_t bits = 1; bits < full; ++bits) {
        Coalition c{std::vector<char>(M, 0), 0.0};
        std::size_t size = 0;
        for (std::size_t j = 0; j < M; ++j) {
            if (bits >> j & 1U) {
                c.mask[j] = 1;
                ++size;
            }
        }
        c.weight = shap_kernel_weight(M, size);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Coalition> sample_coalitions(std::size_t M, std::size_t S, std::uint64_t seed) {
    // Total kernel weight of size k is C(M,k) * w(M,k) = (M-1) / (k (M-k)).
    std::vector<double> cumulative(M - 1);
    double total = 0.0;
    for (std::size_t k = 1; k < M; ++k) {
        total += static_cast<double>(M - 1) / static_cast<double>(k * (M - k));
        cumulative[k - 1] = total;
    }
    Rng rng = make_stream(seed, 0);
    std::vector<std::size_t> order(M);
    std::vector<Coalition> out;
    out.reserve(S);
    while (out.size() < S) {
        const double u = uniform01(rng) * total;
        const std::size_t k =
            1 + static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        const std::size_t size = std::min(k, M - 1);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = 0; i < size; ++i) std::swap(order[i], order[i + uniform_index(rng, M - i)]);
        Coalition c{std::vector<char>(M, 0), 1.0};
        for (std::size_t i = 0; i < size; ++i) c.mask[order[i]] = 1;
        out.push_back(c);
        if (out.size() < S) {
            for (auto& z : c.mask) z = static_cast<char>(1 - z);
            out.push_back(std::move(c));
        }
    }
    return out;
}

}  // namespace

double shap_kernel_weight(std::size_t M, std::size_t size) {
    if (size == 0 || size >= M) throw DomainError("shap_kernel_weight: empty and full coalitions have infinite weight");
    return static_cast<double>(M - 1) / (binomial(M, size) * static_cast<double>(size) * static_cast<double>(M - size));
}

ShapExplanation explain(const PredictFn& f, std::span<const double> query, std::span<const double> reference,
                        const ShapOptions& options) {
    const std::size_t M = query.size();
    if (M == 0) throw ConfigError("explain: no features");
    if (reference.size() != M) throw AlignmentError("explain: reference and query dimensions differ");

    ShapExplanation out;
    out.query.assign(query.begin(), query.end());
    out.reference.assign(reference.begin(), reference.end());
    out.phi0 = f(reference);
    const double delta = f(query) - out.phi0;
    if (M == 1) {
        out.phi = {delta};
        out.enumerated = true;
        return out;
    }
    if (options.samples < M + 2) {
        throw ConfigError("explain: need at least M+2 = " + std::to_string(M + 2) + " coalition samples");
    }

    const bool enumerate = !options.force_sampling && M < 63 && (std::uint64_t{1} << M) - 2 <= options.samples;
    const auto coalitions = enumerate ? enumerate_coalitions(M) : sample_coalitions(M, options.samples, options.seed);
    out.enumerated = enumerate;
    out.n_samples = coalitions.size();

    // Row z: sum_{j<M} (z_j - z_M) phi_j = f(h(z)) - f(ref) - z_M * delta.
    const auto n = static_cast<Eigen::Index>(coalitions.size());
    const auto k = static_cast<Eigen::Index>(M - 1);
    Eigen::MatrixXd a(n, k);
    Eigen::VectorXd b(n);
    std::vector<double> x(M);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& c = coalitions[static_cast<std::size_t>(r)];
        for (std::size_t j = 0; j < M; ++j) x[j] = c.mask[j] ? query[j] : reference[j];
        const double zm = c.mask[M - 1];
        const double sw = std::sqrt(c.weight);
        for (Eigen::Index j = 0; j < k; ++j) a(r, j) = sw * (c.mask[static_cast<std::size_t>(j)] - zm);
        b(r) = sw * (f(x) - out.phi0 - zm * delta);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) throw RankError("explain: sampled coalitions do not identify every attribution");
    const Eigen::VectorXd phi = qr.solve(b);

    out.phi.resize(M);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        out.phi[static_cast<std::size_t>(j)] = phi(j);
        sum += phi(j);
    }
    out.phi[M - 1] = delta - sum;
    return out;
}

ShapExplanation explain(const Model& model, std::span<const double> query, std::span<const double> reference,
                        const ShapOptions& options) {
    return explain([&](std::span<const double> x) { return model.predict(x); }, query, reference, options);
}

std::vector<double> column_means(const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0) throw InsufficientDataError("column_means: no rows");
    std::vector<double> out(static_cast<std::size_t>(rows.cols()));
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out[static_cast<std::size_t>(j)] = rows.col(j).mean();
    return out;
}

AttributionSummary mean_attributions(const PredictFn& f, const Eigen::MatrixXd& rows,
                                     std::span<const double> reference, std::vector<std::string> features,
                                     std::string model, const ShapOptions& options, std::size_t threads) {
    if (rows.rows() == 0) throw InsufficientDataError("mean_attributions: no rows to explain");
    const auto M = static_cast<std::size_t>(rows.cols());
    if (features.size() != M) throw AlignmentError("mean_attributions: feature names do not match columns");

    const auto n = static_cast<std::size_t>(rows.rows());
    std::vector<std::vector<double>> phis(n);
    parallel_for(n, threads, [&](std::size_t i) {
        std::vector<double> q(M);
        for (std::size_t j = 0; j < M; ++j) q[j] = rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        ShapOptions row_options = options;
        row_options.seed = make_stream(options.seed, i)();
        phis[i] = explain(f, q, reference, row_options).phi;
    });

    AttributionSummary s;
    s.model = std::move(model);
    s.features = std::move(features);
    s.rows = n;
    s.mean_phi.assign(M, 0.0);
    s.mean_abs_phi.assign(M, 0.0);
    s.mean_positive.assign(M, 0.0);
    s.mean_negative.assign(M, 0.0);
    for (const auto& phi : phis) {
        for (std::size_t j = 0; j < M; ++j) {
            s.mean_phi[j] += phi[j];
            s.mean_abs_phi[j] += std::abs(phi[j]);
            s.mean_positive[j] += std::max(phi[j], 0.0);
            s.mean_negative[j] += std::min(phi[j], 0.0);
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < M; ++j) {
        s.mean_phi[j] *= inv;
        s.mean_abs_phi[j] *= inv;
        s.mean_positive[j] *= inv;
        s.mean_negative[j] *= inv;
    }
    return s;
}

void write_attributions(std::ostream& out, std::span<const AttributionSummary> tables) {
    out << "feature,mean_phi,mean_abs_phi,model\n";
    for (const auto& t : tables) {
        for (std::size_t j = 0; j < t.features.size(); ++j) {
            out << t.features[j] << ',' << csv::exact(t.mean_phi[j]) << ',' << csv::exact(t.mean_abs_phi[j]) << ','
                << t.model << '\n';
        }
    }
}

}  // namespace rrt
