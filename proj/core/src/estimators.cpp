#include "prsclt/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "prsclt/errors.hpp"

namespace prsclt {

double EntryDist::kurtosis() const {
    switch (kind) {
        case EntryKind::gaussian:
            return 3.0;
        case EntryKind::rademacher:
            return 1.0;
        case EntryKind::genotype: {
            const double v = maf * (1.0 - maf);
            return 3.0 + (1.0 - 6.0 * v) / (2.0 * v);
        }
    }
    return 3.0;
}

std::string to_string(EntryKind kind) {
    switch (kind) {
        case EntryKind::gaussian:
            return "gaussian";
        case EntryKind::rademacher:
            return "rademacher";
        case EntryKind::genotype:
            return "genotype";
    }
    return "unknown";
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::marginal:
            return "marginal";
        case EstimatorKind::reference_ridge:
            return "reference_ridge";
        case EstimatorKind::ridge:
            return "ridge";
    }
    return "unknown";
}

void EffectVector::validate() const {
    if (static_cast<std::size_t>(beta.size()) != causal_mask.size())
        throw ArgumentError("effect vector and mask lengths differ");
    for (Eigen::Index i = 0; i < beta.size(); ++i)
        if (!causal_mask[i] && beta[i] != 0.0)
            throw ArgumentError("effect vector is nonzero off the causal mask at index " + std::to_string(i));
}

namespace {

const Eigen::VectorXd& require_response(const Dataset& d, const char* who) {
    if (!d.response) throw ArgumentError(std::string(who) + ": dataset has no response");
    if (d.response->size() != d.n()) throw ArgumentError(std::string(who) + ": response length differs from n");
    return *d.response;
}

void check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("ridge penalty must be positive");
}

// Solves (DᵀD + c I) b = rhs by Cholesky.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& design, double shift, const Eigen::VectorXd& rhs) {
    const Eigen::Index p = design.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    gram.diagonal().array() += shift;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
    if (llt.info() != Eigen::Success) throw DataError("ridge system is not positive definite");
    return llt.solve(rhs);
}

}  // namespace

SummaryStats summarize(const Dataset& train) {
    const Eigen::VectorXd& y = require_response(train, "summarize");
    return {train.design.transpose() * y, train.n()};
}

Estimate fit_marginal(const Dataset& train) {
    const Eigen::VectorXd& y = require_response(train, "fit_marginal");
    if (train.n() < 1) throw ArgumentError("fit_marginal: empty training set");
    Estimate est;
    est.beta_hat = train.design.transpose() * y / static_cast<double>(train.n());
    est.kind = EstimatorKind::marginal;
    return est;
}

Estimate fit_reference_ridge(const SummaryStats& train, const Dataset& panel, double lambda) {
    check_lambda(lambda);
    if (train.xty.size() != panel.p()) throw ArgumentError("fit_reference_ridge: dimension mismatch");
    if (panel.n() < 1) throw ArgumentError("fit_reference_ridge: empty reference panel");
    Estimate est;
    est.beta_hat = ridge_solve(panel.design, static_cast<double>(panel.n()) * lambda, train.xty);
    est.kind = EstimatorKind::reference_ridge;
    est.lambda = lambda;
    return est;
}

Estimate fit_ridge(const Dataset& train, double lambda) {
    check_lambda(lambda);
    const Eigen::VectorXd& y = require_response(train, "fit_ridge");
    if (train.n() < 1) throw ArgumentError("fit_ridge: empty training set");
    Estimate est;
    est.beta_hat = ridge_solve(train.design, static_cast<double>(train.n()) * lambda, train.design.transpose() * y);
    est.kind = EstimatorKind::ridge;
    est.lambda = lambda;
    return est;
}

double predict(const Estimate& est, const Eigen::VectorXd& z) {
    if (z.size() != est.beta_hat.size()) throw ArgumentError("predict: dimension mismatch");
    return z.dot(est.beta_hat);
}

Accuracy accuracy(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted) {
    if (observed.size() != predicted.size()) throw ArgumentError("accuracy: length mismatch");
    const double ny = observed.norm();
    if (!(ny > 0.0)) throw ArgumentError("accuracy: observed response is zero");
    const double np = predicted.norm();
    if (!std::isfinite(ny) || !std::isfinite(np)) throw DataError("accuracy: non-finite response or prediction");
    if (np == 0.0) return {0.0, true};
    const double a = observed.dot(predicted) / (ny * np);
    return {std::clamp(a, -1.0, 1.0), false};
}

Accuracy accuracy(const Estimate& est, const Dataset& test) {
    const Eigen::VectorXd& y = require_response(test, "accuracy");
    if (test.p() != est.beta_hat.size()) throw ArgumentError("accuracy: dimension mismatch");
    return accuracy(y, test.design * est.beta_hat);
}

}  // namespace prsclt
