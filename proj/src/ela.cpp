#include "instascope/ela.hpp"

#include "instascope/rng.hpp"
#include "instascope/stats.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace instascope {

namespace {

constexpr std::array<const char*, 8> kReasonNames = {
    "zero_variance", "division_by_zero", "insufficient_data", "degenerate_fold",
    "no_better_neighbor", "non_finite", "group_failure", "absent",
};

std::vector<double> to_std(const Vector& v) {
    return {v.data(), v.data() + v.size()};
}

std::string percent_suffix(double q) {
    return fmt::format("{:02d}", static_cast<int>(std::lround(q * 100.0)));
}

void require_rows(const Doe& doe, Eigen::Index min_rows, const char* group) {
    if (doe.size() < min_rows) {
        throw std::invalid_argument(std::string(group) + ": need at least " + std::to_string(min_rows) + " points");
    }
    if (doe.y.size() != doe.size()) {
        throw std::invalid_argument(std::string(group) + ": y length does not match X");
    }
}

double distance(const Matrix& x, Eigen::Index a, Eigen::Index b) {
    return (x.row(a) - x.row(b)).norm();
}

}  // namespace

std::string to_string(MissingReason r) {
    return kReasonNames.at(static_cast<std::size_t>(r));
}

MissingReason missing_reason_from_string(const std::string& text) {
    const auto it = std::find(kReasonNames.begin(), kReasonNames.end(), text);
    if (it == kReasonNames.end()) {
        throw std::invalid_argument("unknown missing reason: " + text);
    }
    return static_cast<MissingReason>(it - kReasonNames.begin());
}

// --- FeatureVector ---------------------------------------------------------

void FeatureVector::set(const std::string& name, double value) {
    if (!std::isfinite(value)) {
        set_missing(name, MissingReason::NonFinite);
        return;
    }
    entries_.push_back({name, value, std::nullopt});
}

void FeatureVector::set(const std::string& name, std::optional<double> value, MissingReason if_missing) {
    if (value) {
        set(name, *value);
    } else {
        set_missing(name, if_missing);
    }
}

void FeatureVector::set_missing(const std::string& name, MissingReason reason) {
    entries_.push_back({name, std::nullopt, reason});
}

void FeatureVector::append(const FeatureVector& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
    provenance.notes.insert(provenance.notes.end(), other.provenance.notes.begin(), other.provenance.notes.end());
}

const FeatureValue* FeatureVector::find(const std::string& name) const {
    for (const auto& e : entries_) {
        if (e.name == name) {
            return &e;
        }
    }
    return nullptr;
}

std::optional<double> FeatureVector::get(const std::string& name) const {
    const auto* e = find(name);
    return e ? e->value : std::nullopt;
}

std::size_t FeatureVector::present_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](const FeatureValue& e) { return e.value.has_value(); }));
}

// --- catalogue ---------------------------------------------------------------

const std::vector<std::string>& distr_names() {
    static const std::vector<std::string> names{
        "ela_distr.skewness", "ela_distr.kurtosis", "ela_distr.number_of_peaks"};
    return names;
}

const std::vector<std::string>& meta_names() {
    static const std::vector<std::string> names{
        "ela_meta.lin_simple.adj_r2",      "ela_meta.lin_simple.intercept",
        "ela_meta.lin_simple.coef.min",    "ela_meta.lin_simple.coef.max",
        "ela_meta.lin_simple.coef.max_by_min", "ela_meta.lin_w_interact.adj_r2",
        "ela_meta.quad_simple.adj_r2",     "ela_meta.quad_simple.cond",
        "ela_meta.quad_w_interact.adj_r2"};
    return names;
}

std::vector<std::string> level_names(std::span<const double> quantiles) {
    std::vector<std::string> names;
    for (const char* kind : {"mmce_lda_", "mmce_qda_", "lda_qda_"}) {
        for (double q : quantiles) {
            names.push_back(std::string("ela_level.") + kind + percent_suffix(q));
        }
    }
    return names;
}

const std::vector<std::string>& pca_names() {
    static const std::vector<std::string> names{
        "pca.expl_var.cov_x",     "pca.expl_var.cor_x",     "pca.expl_var.cov_init",     "pca.expl_var.cor_init",
        "pca.expl_var_PC1.cov_x", "pca.expl_var_PC1.cor_x", "pca.expl_var_PC1.cov_init", "pca.expl_var_PC1.cor_init"};
    return names;
}

const std::vector<std::string>& nbc_names() {
    static const std::vector<std::string> names{
        "nbc.nn_nb.sd_ratio", "nbc.nn_nb.mean_ratio", "nbc.nn_nb.cor", "nbc.dist_ratio.coeff_var",
        "nbc.nb_fitness.cor"};
    return names;
}

std::vector<std::string> disp_names(std::span<const double> quantiles) {
    std::vector<std::string> names;
    for (const char* kind : {"ratio_mean_", "ratio_median_", "diff_mean_", "diff_median_"}) {
        for (double q : quantiles) {
            names.push_back(std::string("disp.") + kind + percent_suffix(q));
        }
    }
    return names;
}

const std::vector<std::string>& ic_names() {
    static const std::vector<std::string> names{"ic.h_max", "ic.eps_s", "ic.eps_max", "ic.m0"};
    return names;
}

const std::vector<std::string>& feature_catalogue() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> all;
        auto add = [&](const std::vector<std::string>& v) { all.insert(all.end(), v.begin(), v.end()); };
        add(distr_names());
        add(meta_names());
        add(level_names(kDefaultLevelQuantiles));
        add(pca_names());
        add(nbc_names());
        add(disp_names(kDefaultDispQuantiles));
        add(ic_names());
        return all;
    }();
    return names;
}

// --- y-distribution ------------------------------------------------------------

namespace {

double silverman_bandwidth(const std::vector<double>& y) {
    const double sd = sample_sd(y);
    const double iqr = quantile(y, 0.75) - quantile(y, 0.25);
    double lo = std::min(sd, iqr / 1.34);
    if (!(lo > 0.0)) {
        lo = sd;
    }
    if (!(lo > 0.0)) {
        lo = std::abs(y.front());
    }
    if (!(lo > 0.0)) {
        lo = 1.0;
    }
    return 0.9 * lo * std::pow(static_cast<double>(y.size()), -0.2);
}

int count_kde_peaks(const std::vector<double>& y) {
    const double bw = silverman_bandwidth(y);
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    const double lo = *mn - 3.0 * bw;
    const double hi = *mx + 3.0 * bw;
    std::vector<double> density(kKdeGridPoints, 0.0);
    for (int g = 0; g < kKdeGridPoints; ++g) {
        const double t = lo + (hi - lo) * g / (kKdeGridPoints - 1);
        double sum = 0.0;
        for (double v : y) {
            const double u = (t - v) / bw;
            sum += std::exp(-0.5 * u * u);
        }
        density[static_cast<std::size_t>(g)] = sum;
    }
    const double top = *std::max_element(density.begin(), density.end());
    int peaks = 0;
    for (std::size_t g = 0; g < density.size(); ++g) {
        const double left = g > 0 ? density[g - 1] : -1.0;
        const double right = g + 1 < density.size() ? density[g + 1] : -1.0;
        if (density[g] > left && density[g] >= right && density[g] >= kPeakThreshold * top) {
            ++peaks;
        }
    }
    return peaks;
}

}  // namespace

FeatureVector ela_distr(const Doe& doe) {
    require_rows(doe, 10, "ela_distr");
    const auto y = to_std(doe.y);
    FeatureVector fv;
    const auto& names = distr_names();
    const double m2 = central_moment(y, 2);
    if (m2 > 0.0) {
        fv.set(names[0], central_moment(y, 3) / std::pow(m2, 1.5));
        fv.set(names[1], central_moment(y, 4) / (m2 * m2) - 3.0);
    } else {
        fv.set_missing(names[0], MissingReason::ZeroVariance);
        fv.set_missing(names[1], MissingReason::ZeroVariance);
    }
    fv.set(names[2], static_cast<double>(count_kde_peaks(y)));
    return fv;
}

// --- meta-model ------------------------------------------------------------------

namespace {

struct Fit {
    Vector coef;
    std::optional<double> adj_r2;
    bool rank_deficient = false;
};

Fit least_squares(const Matrix& design, const Vector& y) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    Fit fit;
    fit.coef = cod.solve(y);
    fit.rank_deficient = cod.rank() < design.cols();
    const double n = static_cast<double>(design.rows());
    const double predictors = static_cast<double>(design.cols() - 1);
    const double ybar = y.mean();
    const double ss_tot = (y.array() - ybar).square().sum();
    const double ss_res = (y - design * fit.coef).squaredNorm();
    if (ss_tot > 0.0 && n - predictors - 1.0 > 0.0) {
        const double r2 = 1.0 - ss_res / ss_tot;
        fit.adj_r2 = 1.0 - (1.0 - r2) * (n - 1.0) / (n - predictors - 1.0);
    }
    return fit;
}

// Intercept, linear terms, then optional squares and pairwise products.
Matrix design_matrix(const Matrix& x, bool squares, bool interactions) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    Eigen::Index cols = 1 + d + (squares ? d : 0) + (interactions ? d * (d - 1) / 2 : 0);
    Matrix m(n, cols);
    m.col(0).setOnes();
    m.middleCols(1, d) = x;
    Eigen::Index c = 1 + d;
    if (squares) {
        for (Eigen::Index j = 0; j < d; ++j) {
            m.col(c++) = x.col(j).array().square();
        }
    }
    if (interactions) {
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = i + 1; j < d; ++j) {
                m.col(c++) = x.col(i).cwiseProduct(x.col(j));
            }
        }
    }
    return m;
}

std::optional<double> ratio(double num, double den) {
    if (den == 0.0) {
        return std::nullopt;
    }
    return num / den;
}

}  // namespace

FeatureVector ela_meta(const Doe& doe) {
    require_rows(doe, 2 * doe.dim() + 3, "ela_meta");
    const auto& names = meta_names();
    const Eigen::Index d = doe.dim();
    FeatureVector fv;
    auto note = [&](const char* model, bool deficient, const Matrix& design) {
        if (deficient) {
            Eigen::JacobiSVD<Matrix> svd(design);
            const auto& sv = svd.singularValues();
            fv.provenance.notes.push_back(fmt::format("ela_meta.{}: rank-deficient design, condition {}", model,
                                                      sv[0] / sv[sv.size() - 1]));
        }
    };

    const Matrix lin = design_matrix(doe.x, false, false);
    const Fit lin_fit = least_squares(lin, doe.y);
    note("lin_simple", lin_fit.rank_deficient, lin);
    const Vector abs_coef = lin_fit.coef.tail(d).cwiseAbs();
    fv.set(names[0], lin_fit.adj_r2, MissingReason::ZeroVariance);
    fv.set(names[1], lin_fit.coef[0]);
    fv.set(names[2], abs_coef.minCoeff());
    fv.set(names[3], abs_coef.maxCoeff());
    fv.set(names[4], ratio(abs_coef.maxCoeff(), abs_coef.minCoeff()), MissingReason::DivisionByZero);

    const Matrix lin_int = design_matrix(doe.x, false, true);
    const Fit lin_int_fit = least_squares(lin_int, doe.y);
    note("lin_w_interact", lin_int_fit.rank_deficient, lin_int);
    fv.set(names[5], lin_int_fit.adj_r2, MissingReason::ZeroVariance);

    const Matrix quad = design_matrix(doe.x, true, false);
    const Fit quad_fit = least_squares(quad, doe.y);
    note("quad_simple", quad_fit.rank_deficient, quad);
    const Vector abs_quad = quad_fit.coef.segment(1 + d, d).cwiseAbs();
    fv.set(names[6], quad_fit.adj_r2, MissingReason::ZeroVariance);
    fv.set(names[7], ratio(abs_quad.maxCoeff(), abs_quad.minCoeff()), MissingReason::DivisionByZero);

    const Matrix quad_int = design_matrix(doe.x, true, true);
    const Fit quad_int_fit = least_squares(quad_int, doe.y);
    note("quad_w_interact", quad_int_fit.rank_deficient, quad_int);
    const double ss_tot = (doe.y.array() - doe.y.mean()).square().sum();
    fv.set(names[8], quad_int_fit.adj_r2, ss_tot == 0.0 ? MissingReason::ZeroVariance : MissingReason::InsufficientData);
    return fv;
}

// --- level set -------------------------------------------------------------------

namespace {

constexpr std::uint64_t kFoldStream = 0x666f6c6473ULL;

struct Gaussian {
    Vector mean;
    Eigen::LLT<Matrix> chol;
    double log_det = 0.0;
};

// Cholesky with a growing ridge when the scatter matrix is singular.
Gaussian fit_gaussian(const Vector& mean, Matrix cov) {
    const Eigen::Index d = cov.rows();
    const double scale = std::max(cov.trace() / static_cast<double>(d), 1e-300);
    double ridge = 0.0;
    Gaussian g;
    g.mean = mean;
    for (int attempt = 0; attempt < 20; ++attempt) {
        Matrix m = cov;
        m.diagonal().array() += ridge;
        g.chol.compute(m);
        if (g.chol.info() == Eigen::Success && g.chol.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) {
            g.log_det = 2.0 * g.chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
            return g;
        }
        ridge = ridge == 0.0 ? 1e-10 * scale : ridge * 10.0;
    }
    throw std::runtime_error("fit_gaussian: covariance not positive definite");
}

double mahalanobis(const Gaussian& g, const Vector& x) {
    const Vector diff = x - g.mean;
    return diff.dot(g.chol.solve(diff));
}

struct FoldError {
    double lda;
    double qda;
};

// Mean per-fold misclassification of LDA and QDA.
std::optional<FoldError> cross_validate(const Matrix& x, const std::vector<int>& label, const std::vector<int>& fold) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    double lda_sum = 0.0;
    double qda_sum = 0.0;
    int folds_used = 0;
    for (int f = 0; f < kLevelFolds; ++f) {
        std::array<std::vector<Eigen::Index>, 2> train;
        std::vector<Eigen::Index> test;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (fold[static_cast<std::size_t>(i)] == f) {
                test.push_back(i);
            } else {
                train[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].push_back(i);
            }
        }
        if (test.empty()) {
            continue;
        }
        if (train[0].size() < 2 || train[1].size() < 2) {
            return std::nullopt;
        }
        std::array<Vector, 2> means;
        std::array<Matrix, 2> scatter;
        for (int c = 0; c < 2; ++c) {
            means[c] = Vector::Zero(d);
            for (auto i : train[c]) {
                means[c] += x.row(i).transpose();
            }
            means[c] /= static_cast<double>(train[c].size());
            scatter[c] = Matrix::Zero(d, d);
            for (auto i : train[c]) {
                const Vector diff = x.row(i).transpose() - means[c];
                scatter[c].noalias() += diff * diff.transpose();
            }
        }
        const double n_train = static_cast<double>(train[0].size() + train[1].size());
        const std::array<double, 2> log_prior{std::log(static_cast<double>(train[0].size()) / n_train),
                                              std::log(static_cast<double>(train[1].size()) / n_train)};
        const Matrix pooled = (scatter[0] + scatter[1]) / (n_train - 2.0);
        const Gaussian shared0 = fit_gaussian(means[0], pooled);
        Gaussian shared1 = shared0;
        shared1.mean = means[1];
        const Gaussian own0 = fit_gaussian(means[0], scatter[0] / static_cast<double>(train[0].size() - 1));
        const Gaussian own1 = fit_gaussian(means[1], scatter[1] / static_cast<double>(train[1].size() - 1));

        int lda_wrong = 0;
        int qda_wrong = 0;
        for (auto i : test) {
            const Vector xi = x.row(i).transpose();
            const int truth = label[static_cast<std::size_t>(i)];
            const double l0 = -0.5 * mahalanobis(shared0, xi) + log_prior[0];
            const double l1 = -0.5 * mahalanobis(shared1, xi) + log_prior[1];
            const double q0 = -0.5 * (mahalanobis(own0, xi) + own0.log_det) + log_prior[0];
            const double q1 = -0.5 * (mahalanobis(own1, xi) + own1.log_det) + log_prior[1];
            if ((l1 > l0 ? 1 : 0) != truth) {
                ++lda_wrong;
            }
            if ((q1 > q0 ? 1 : 0) != truth) {
                ++qda_wrong;
            }
        }
        lda_sum += static_cast<double>(lda_wrong) / static_cast<double>(test.size());
        qda_sum += static_cast<double>(qda_wrong) / static_cast<double>(test.size());
        ++folds_used;
    }
    if (folds_used == 0) {
        return std::nullopt;
    }
    return FoldError{lda_sum / folds_used, qda_sum / folds_used};
}

// Stratified assignment: each class is shuffled and dealt round-robin, the
// deal continuing across classes so fold sizes stay balanced.
std::vector<int> stratified_folds(const std::vector<int>& label, std::uint64_t seed, int attempt, double q) {
    Rng rng(mix_seed({kFoldStream, seed, static_cast<std::uint64_t>(attempt),
                      static_cast<std::uint64_t>(std::llround(q * 1e6))}));
    std::vector<int> fold(label.size(), 0);
    int next = 0;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < label.size(); ++i) {
            if (label[i] == c) {
                members.push_back(i);
            }
        }
        rng.shuffle(members.begin(), members.end());
        for (auto i : members) {
            fold[i] = next;
            next = (next + 1) % kLevelFolds;
        }
    }
    return fold;
}

}  // namespace

FeatureVector ela_level(const Doe& doe, std::span<const double> quantiles) {
    require_rows(doe, 10 * kLevelFolds, "ela_level");
    const auto y = to_std(doe.y);
    const auto names = level_names(quantiles);
    const std::size_t nq = quantiles.size();
    FeatureVector lda;
    FeatureVector qda;
    FeatureVector ratio_fv;
    for (std::size_t k = 0; k < nq; ++k) {
        const double q = quantiles[k];
        const double threshold = quantile(y, q);
        std::vector<int> label(y.size());
        int ones = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            label[i] = y[i] <= threshold ? 1 : 0;
            ones += label[i];
        }
        std::optional<FoldError> err;
        MissingReason reason = MissingReason::DegenerateFold;
        if (ones < 2 || static_cast<std::size_t>(ones) + 2 > y.size()) {
            reason = MissingReason::InsufficientData;
        } else {
            for (int attempt = 0; attempt < 2 && !err; ++attempt) {
                err = cross_validate(doe.x, label, stratified_folds(label, doe.seed, attempt, q));
            }
        }
        if (err) {
            lda.set(names[k], err->lda);
            qda.set(names[nq + k], err->qda);
            ratio_fv.set(names[2 * nq + k], ratio(err->lda, err->qda), MissingReason::DivisionByZero);
        } else {
            lda.set_missing(names[k], reason);
            qda.set_missing(names[nq + k], reason);
            ratio_fv.set_missing(names[2 * nq + k], reason);
        }
    }
    lda.append(qda);
    lda.append(ratio_fv);
    return lda;
}

// --- PCA -----------------------------------------------------------------------------

namespace {

struct Explained {
    double fraction_for_90;
    double first;
};

std::optional<Explained> explained_variance(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    Vector ev = solver.eigenvalues().cwiseMax(0.0).reverse();
    const double total = ev.sum();
    if (!(total > 0.0)) {
        return std::nullopt;
    }
    double cumulative = 0.0;
    Eigen::Index needed = ev.size();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        cumulative += ev[i];
        if (cumulative >= 0.9 * total) {
            needed = i + 1;
            break;
        }
    }
    return Explained{static_cast<double>(needed) / static_cast<double>(ev.size()), ev[0] / total};
}

Matrix covariance(const Matrix& data) {
    const Matrix centered = data.rowwise() - data.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(data.rows() - 1);
}

std::optional<Matrix> correlation(const Matrix& cov) {
    const Vector sd = cov.diagonal().cwiseSqrt();
    if ((sd.array() <= 0.0).any()) {
        return std::nullopt;
    }
    const Vector inv = sd.cwiseInverse();
    return inv.asDiagonal() * cov * inv.asDiagonal();
}

}  // namespace

FeatureVector pca_features(const Doe& doe) {
    require_rows(doe, doe.dim() + 1, "pca_features");
    const auto& names = pca_names();
    Matrix joined(doe.size(), doe.dim() + 1);
    joined << doe.x, doe.y;
    const Matrix cov_x = covariance(doe.x);
    const Matrix cov_init = covariance(joined);
    const auto cor_x = correlation(cov_x);
    const auto cor_init = correlation(cov_init);

    std::array<std::optional<Explained>, 4> parts{
        explained_variance(cov_x),
        cor_x ? explained_variance(*cor_x) : std::nullopt,
        explained_variance(cov_init),
        cor_init ? explained_variance(*cor_init) : std::nullopt,
    };
    FeatureVector fv;
    for (std::size_t i = 0; i < 4; ++i) {
        fv.set(names[i], parts[i] ? std::optional(parts[i]->fraction_for_90) : std::nullopt, MissingReason::ZeroVariance);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        fv.set(names[4 + i], parts[i] ? std::optional(parts[i]->first) : std::nullopt, MissingReason::ZeroVariance);
    }
    return fv;
}

// --- nearest-better clustering --------------------------------------------------------

FeatureVector nbc_features(const Doe& doe) {
    require_rows(doe, 10, "nbc_features");
    const auto& names = nbc_names();
    const Eigen::Index n = doe.size();
    const auto inf = std::numeric_limits<double>::infinity();
    std::vector<double> nn(static_cast<std::size_t>(n), inf);
    std::vector<double> nb(static_cast<std::size_t>(n), inf);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double dij = distance(doe.x, i, j);
            auto& nni = nn[static_cast<std::size_t>(i)];
            auto& nbi = nb[static_cast<std::size_t>(i)];
            if (dij < nni) {
                nni = dij;
            }
            if (doe.y[j] < doe.y[i] && dij < nbi) {
                nbi = dij;
            }
        }
    }
    double max_nb = -inf;
    for (double v : nb) {
        if (std::isfinite(v)) {
            max_nb = std::max(max_nb, v);
        }
    }
    FeatureVector fv;
    if (!std::isfinite(max_nb)) {
        for (const auto& name : names) {
            fv.set_missing(name, MissingReason::NoBetterNeighbor);
        }
        return fv;
    }
    for (double& v : nb) {
        if (!std::isfinite(v)) {
            v = max_nb;
        }
    }
    const double sd_nb = sample_sd(nb);
    const double mean_nb = mean(nb);
    fv.set(names[0], ratio(sample_sd(nn), sd_nb), MissingReason::DivisionByZero);
    fv.set(names[1], ratio(mean(nn), mean_nb), MissingReason::DivisionByZero);
    fv.set(names[2], pearson(nn, nb), MissingReason::ZeroVariance);

    std::vector<double> quotient;
    for (std::size_t i = 0; i < nb.size(); ++i) {
        if (nn[i] > 0.0) {
            quotient.push_back(nb[i] / nn[i]);
        }
    }
    if (quotient.size() >= 2) {
        fv.set(names[3], ratio(sample_sd(quotient), mean(quotient)), MissingReason::DivisionByZero);
    } else {
        fv.set_missing(names[3], MissingReason::InsufficientData);
    }
    const auto y = to_std(doe.y);
    fv.set(names[4], pearson(nb, midranks(y)), MissingReason::ZeroVariance);
    return fv;
}

// --- dispersion --------------------------------------------------------------------

namespace {

struct DistanceSummary {
    double mean;
    double median;
};

// Pairwise distances among the given (ascending) indices.
DistanceSummary pairwise_summary(const Matrix& x, const std::vector<Eigen::Index>& idx) {
    std::vector<double> d;
    d.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            d.push_back(distance(x, idx[a], idx[b]));
        }
    }
    const double m = mean(d);
    return {m, quantile(d, 0.5)};
}

}  // namespace

FeatureVector disp_features(const Doe& doe, std::span<const double> quantiles) {
    require_rows(doe, 2, "disp_features");
    const auto names = disp_names(quantiles);
    const std::size_t nq = quantiles.size();
    const Eigen::Index n = doe.size();

    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const auto base = pairwise_summary(doe.x, all);

    std::vector<Eigen::Index> by_fitness = all;
    std::stable_sort(by_fitness.begin(), by_fitness.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return doe.y[a] < doe.y[b]; });

    std::array<FeatureVector, 4> parts;
    for (std::size_t k = 0; k < nq; ++k) {
        const auto count = static_cast<Eigen::Index>(std::ceil(quantiles[k] * static_cast<double>(n) - 1e-9));
        if (count < 2) {
            for (std::size_t g = 0; g < 4; ++g) {
                parts[g].set_missing(names[g * nq + k], MissingReason::InsufficientData);
            }
            continue;
        }
        std::vector<Eigen::Index> best(by_fitness.begin(), by_fitness.begin() + std::min(count, n));
        std::sort(best.begin(), best.end());
        const auto s = pairwise_summary(doe.x, best);
        parts[0].set(names[k], ratio(s.mean, base.mean), MissingReason::DivisionByZero);
        parts[1].set(names[nq + k], ratio(s.median, base.median), MissingReason::DivisionByZero);
        parts[2].set(names[2 * nq + k], s.mean - base.mean);
        parts[3].set(names[3 * nq + k], s.median - base.median);
    }
    FeatureVector fv;
    for (const auto& p : parts) {
        fv.append(p);
    }
    return fv;
}

// --- information content ------------------------------------------------------------

namespace {

constexpr int kIcGridPoints = 1001;
constexpr double kIcLogLower = -5.0;
constexpr double kIcLogUpper = 15.0;

// Slopes along a greedy nearest-neighbour tour starting at row 0;
// zero-length steps are skipped.
std::vector<double> tour_slopes(const Doe& doe) {
    const Eigen::Index n = doe.size();
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    std::vector<double> slopes;
    Eigen::Index current = 0;
    visited[0] = true;
    for (Eigen::Index step = 1; step < n; ++step) {
        Eigen::Index next = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (visited[static_cast<std::size_t>(j)]) {
                continue;
            }
            const double dj = distance(doe.x, current, j);
            if (dj < best) {
                best = dj;
                next = j;
            }
        }
        visited[static_cast<std::size_t>(next)] = true;
        if (best > 0.0) {
            slopes.push_back((doe.y[next] - doe.y[current]) / best);
        }
        current = next;
    }
    return slopes;
}

std::vector<int> symbols(const std::vector<double>& slopes, double eps) {
    std::vector<int> s(slopes.size());
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        s[i] = slopes[i] > eps ? 1 : (slopes[i] < -eps ? -1 : 0);
    }
    return s;
}

double pair_entropy(const std::vector<int>& s) {
    if (s.size() < 2) {
        return 0.0;
    }
    std::array<int, 9> counts{};
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] != s[i + 1]) {
            ++counts[static_cast<std::size_t>((s[i] + 1) * 3 + (s[i + 1] + 1))];
        }
    }
    const double total = static_cast<double>(s.size() - 1);
    double h = 0.0;
    for (int c : counts) {
        if (c > 0) {
            const double p = c / total;
            h -= p * std::log(p) / std::log(6.0);
        }
    }
    return h;
}

}  // namespace

FeatureVector ic_features(const Doe& doe) {
    require_rows(doe, 10, "ic_features");
    const auto& names = ic_names();
    const auto slopes = tour_slopes(doe);
    FeatureVector fv;
    if (slopes.size() < 2) {
        for (const auto& name : names) {
            fv.set_missing(name, MissingReason::InsufficientData);
        }
        return fv;
    }
    double h_max = -1.0;
    double log_eps_max = 0.0;
    std::optional<double> log_eps_s;
    for (int g = 0; g < kIcGridPoints; ++g) {
        const double log_eps = kIcLogLower + (kIcLogUpper - kIcLogLower) * g / (kIcGridPoints - 1);
        const double h = pair_entropy(symbols(slopes, std::pow(10.0, log_eps)));
        if (h > h_max) {
            h_max = h;
            log_eps_max = log_eps;
        }
        if (h >= kIcSettling) {
            log_eps_s = log_eps;
        }
    }
    fv.set(names[0], h_max);
    fv.set(names[1], log_eps_s, MissingReason::ZeroVariance);
    if (h_max > 0.0) {
        fv.set(names[2], log_eps_max);
    } else {
        fv.set_missing(names[2], MissingReason::ZeroVariance);
    }

    const auto s0 = symbols(slopes, 0.0);
    int previous = 0;
    int changes = 0;
    for (int v : s0) {
        if (v == 0) {
            continue;
        }
        if (previous != 0 && v != previous) {
            ++changes;
        }
        previous = v;
    }
    fv.set(names[3], static_cast<double>(changes) / static_cast<double>(s0.size() - 1));
    return fv;
}

// --- assembly ------------------------------------------------------------------------

FeatureVector compute_all(const Doe& doe) {
    struct Group {
        const char* name;
        std::function<FeatureVector(const Doe&)> run;
        std::vector<std::string> names;
    };
    const std::vector<Group> groups{
        {"ela_distr", [](const Doe& d) { return ela_distr(d); }, distr_names()},
        {"ela_meta", [](const Doe& d) { return ela_meta(d); }, meta_names()},
        {"ela_level", [](const Doe& d) { return ela_level(d); }, level_names(kDefaultLevelQuantiles)},
        {"pca", [](const Doe& d) { return pca_features(d); }, pca_names()},
        {"nbc", [](const Doe& d) { return nbc_features(d); }, nbc_names()},
        {"disp", [](const Doe& d) { return disp_features(d); }, disp_names(kDefaultDispQuantiles)},
        {"ic", [](const Doe& d) { return ic_features(d); }, ic_names()},
    };
    FeatureVector out;
    out.provenance.instance = doe.instance;
    out.provenance.doe_seed = doe.seed;
    for (const auto& g : groups) {
        const auto start = std::chrono::steady_clock::now();
        FeatureVector part;
        try {
            part = g.run(doe);
        } catch (const std::exception& e) {
            part = FeatureVector{};
            for (const auto& name : g.names) {
                part.set_missing(name, MissingReason::GroupFailure);
            }
            part.provenance.notes.push_back(std::string(g.name) + ": " + e.what());
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        out.append(part);
        out.provenance.group_seconds.emplace_back(g.name, elapsed.count());
    }
    return out;
}

DegenerateReport drop_degenerate(const std::vector<FeatureVector>& rows) {
    if (rows.size() < 2) {
        throw std::invalid_argument("drop_degenerate: need at least 2 rows");
    }
    DegenerateReport report;
    for (const auto& entry : rows.front().entries()) {
        const auto& name = entry.name;
        std::optional<double> first;
        bool varies = false;
        for (const auto& row : rows) {
            const auto v = row.get(name);
            if (!v) {
                continue;
            }
            if (!first) {
                first = v;
            } else if (*v != *first) {
                varies = true;
                break;
            }
        }
        (varies ? report.kept : report.dropped).push_back(name);
    }
    return report;
}

}  // namespace instascope
