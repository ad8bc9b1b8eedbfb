#include "prsclt/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "prsclt/errors.hpp"
#include "prsclt/rng.hpp"

namespace prsclt {

namespace {

std::vector<int> mask_indices(const Mask& mask) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(mask.size()); ++i)
        if (mask[i]) idx.push_back(i);
    return idx;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& a, const std::vector<int>& rows) {
    Eigen::MatrixXd out(rows.size(), a.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(k) = a.row(rows[k]);
    return out;
}

Eigen::MatrixXd select_cols(const Eigen::MatrixXd& a, const std::vector<int>& cols) {
    Eigen::MatrixXd out(a.rows(), cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(k) = a.col(cols[k]);
    return out;
}

double parse_double(std::string_view tok, const std::string& where) {
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
        tok.remove_suffix(1);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        throw ValidationError("parse", where + ": cannot parse '" + std::string(tok) + "'");
    return v;
}

}  // namespace

CovarianceModel CovarianceModel::from_matrix(Eigen::MatrixXd sigma, Mask mask) {
    const Eigen::Index p = sigma.rows();
    if (p < 1 || sigma.cols() != p)
        throw ValidationError("shape", "covariance matrix must be square and non-empty");
    if (static_cast<Eigen::Index>(mask.size()) != p)
        throw ArgumentError("causal mask length differs from covariance dimension");
    if (!sigma.allFinite()) throw ValidationError("finite", "covariance matrix has non-finite entries");

    const double scale = sigma.cwiseAbs().maxCoeff();
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw ValidationError("symmetry", "covariance matrix is not symmetric (max |Σ−Σᵀ| = " +
                                              std::to_string(asym) + ")");
    sigma = 0.5 * (sigma + sigma.transpose()).eval();

    CovarianceModel cov;
    cov.matrix_ = std::move(sigma);
    cov.mask_ = std::move(mask);

    const bool is_eye = cov.matrix_.isIdentity(0.0);
    if (is_eye) {
        cov.eigenvalues_ = Eigen::VectorXd::Ones(p);
        cov.eigenvectors_ = Eigen::MatrixXd::Identity(p, p);
        cov.sqrt_ = Eigen::MatrixXd::Identity(p, p);
        cov.is_identity_ = true;
        cov.finish();
        return cov;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.matrix_);
    if (es.info() != Eigen::Success)
        throw ValidationError("eigendecomposition", "symmetric eigensolver failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ev[a] > ev[b]; });

    cov.eigenvalues_.resize(p);
    cov.eigenvectors_.resize(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        cov.eigenvalues_[k] = ev[order[k]];
        cov.eigenvectors_.col(k) = es.eigenvectors().col(order[k]);
    }

    const double top = std::max(cov.eigenvalues_[0], 0.0);
    const double bottom = cov.eigenvalues_[p - 1];
    if (bottom < -1e-10 * top || (top == 0.0 && bottom < 0.0))
        throw ValidationError("psd", "covariance matrix is not positive semidefinite (min eigenvalue " +
                                         std::to_string(bottom) + ")");
    cov.eigenvalues_ = cov.eigenvalues_.cwiseMax(0.0);

    // Symmetric products via rank updates: half the flops of a full GEMM.
    const Eigen::MatrixXd& u = cov.eigenvectors_;
    auto gram = [&](const Eigen::VectorXd& scale) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
        out.selfadjointView<Eigen::Lower>().rankUpdate(u * scale.asDiagonal());
        out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
        return out;
    };
    const double norm = cov.matrix_.norm();
    const double recon = (cov.matrix_ - gram(cov.eigenvalues_.cwiseSqrt())).norm();
    if (norm > 0.0 ? recon > 1e-10 * norm : recon > 1e-10)
        throw ValidationError("reconstruction", "eigenpairs do not reconstruct the covariance matrix");

    cov.sqrt_ = gram(cov.eigenvalues_.cwiseSqrt().cwiseSqrt());
    cov.finish();
    return cov;
}

CovarianceModel CovarianceModel::identity(int p, Mask mask) {
    if (p < 1) throw ArgumentError("dimension must be positive");
    return from_matrix(Eigen::MatrixXd::Identity(p, p), std::move(mask));
}

void CovarianceModel::finish() {
    const int p = dim();
    mask_index_ = mask_indices(mask_);
    mask_vec_ = Eigen::VectorXd::Zero(p);
    for (int i : mask_index_) mask_vec_[i] = 1.0;
    const auto m = static_cast<Eigen::Index>(mask_index_.size());

    if (is_identity_) {
        for (auto& d : masked_diag_) d = Eigen::VectorXd::Ones(m);
        sq_block_norm2_ = static_cast<double>(m);
        overlaps_ = mask_vec_;
        return;
    }

    const Eigen::MatrixXd cols = select_cols(matrix_, mask_index_);
    const Eigen::MatrixXd um = select_rows(eigenvectors_, mask_index_);
    masked_diag_[0].resize(m);
    for (Eigen::Index k = 0; k < m; ++k) masked_diag_[0][k] = matrix_(mask_index_[k], mask_index_[k]);
    masked_diag_[1] = cols.colwise().squaredNorm().transpose();
    masked_diag_[2] = um.cwiseAbs2() * eigenvalues_.array().cube().matrix();

    // ‖(Σ²)_MM‖_F² from the lower triangle of Σ(:, M)ᵀΣ(:, M).
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
    block.selfadjointView<Eigen::Lower>().rankUpdate(cols.transpose());
    const double lower = block.triangularView<Eigen::Lower>().toDenseMatrix().squaredNorm();
    sq_block_norm2_ = 2.0 * lower - block.diagonal().squaredNorm();

    overlaps_ = um.colwise().squaredNorm().transpose();
}

const Eigen::VectorXd& CovarianceModel::masked_power_diagonal(int power) const {
    if (power < 1 || power > 3) throw ArgumentError("masked_power_diagonal: power must be 1, 2 or 3");
    return masked_diag_[power - 1];
}

Eigen::MatrixXd CovarianceModel::masked_spectral_block(const Eigen::VectorXd& f) const {
    if (is_identity_) {
        Eigen::VectorXd d(mask_index_.size());
        for (std::size_t k = 0; k < mask_index_.size(); ++k) d[k] = f[mask_index_[k]];
        return d.asDiagonal();
    }
    const Eigen::MatrixXd um = select_rows(eigenvectors_, mask_index_);
    return um * f.asDiagonal() * um.transpose();
}

Eigen::MatrixXd CovarianceModel::spectral_matrix(const Eigen::VectorXd& f) const {
    if (is_identity_) return f.asDiagonal();
    return eigenvectors_ * f.asDiagonal() * eigenvectors_.transpose();
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("file", "cannot open covariance file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::string_view sv(line);
        std::size_t start = 0;
        while (true) {
            auto comma = sv.find(',', start);
            auto tok = sv.substr(start, comma == std::string_view::npos ? sv.npos : comma - start);
            row.push_back(parse_double(tok, path + ":" + std::to_string(lineno)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    const auto p = rows.size();
    if (p == 0) throw ValidationError("shape", path + ": empty covariance file");
    Eigen::MatrixXd out(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        if (rows[i].size() != p)
            throw ValidationError("shape", path + ": row " + std::to_string(i + 1) + " has " +
                                               std::to_string(rows[i].size()) + " entries, expected " +
                                               std::to_string(p));
        for (std::size_t j = 0; j < p; ++j) out(i, j) = rows[i][j];
    }
    return out;
}

Mask make_mask(const MaskSpec& spec, int p) {
    if (p < 1) throw ArgumentError("dimension must be positive");
    auto check_m = [p](int m) {
        if (m < 0 || m > p)
            throw ArgumentError("mask size m = " + std::to_string(m) + " outside [0, " +
                                std::to_string(p) + "]");
    };
    Mask mask(p, false);
    if (auto* f = std::get_if<FirstM>(&spec)) {
        check_m(f->m);
        std::fill(mask.begin(), mask.begin() + f->m, true);
    } else if (auto* r = std::get_if<RandomMask>(&spec)) {
        check_m(r->m);
        // Partial Fisher-Yates on the index set.
        std::vector<int> idx(p);
        std::iota(idx.begin(), idx.end(), 0);
        CounterRng rng(derive_seed(r->seed, 0, Stream::mask));
        for (int k = 0; k < r->m; ++k) {
            auto span = static_cast<std::uint64_t>(p - k);
            int j = k + static_cast<int>(rng() % span);
            std::swap(idx[k], idx[j]);
            mask[idx[k]] = true;
        }
    } else {
        const auto& path = std::get<FileMask>(spec).path;
        std::ifstream in(path);
        if (!in) throw ValidationError("file", "cannot open mask file " + path);
        std::string line;
        int count = 0;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line != "0" && line != "1")
                throw ValidationError("parse", path + ":" + std::to_string(lineno) + ": expected 0 or 1");
            if (count >= p) throw ValidationError("shape", path + ": more than p mask entries");
            mask[count++] = line == "1";
        }
        if (count != p)
            throw ValidationError("shape", path + ": expected " + std::to_string(p) + " mask entries, got " +
                                               std::to_string(count));
    }
    return mask;
}

CovarianceModel build_covariance(const CovSpec& kind, int p, const MaskSpec& mask_spec) {
    if (auto* f = std::get_if<FileCov>(&kind)) {
        Eigen::MatrixXd sigma = read_matrix_csv(f->path);
        if (p > 0 && sigma.rows() != p)
            throw ValidationError("shape", f->path + ": dimension " + std::to_string(sigma.rows()) +
                                               " differs from declared p = " + std::to_string(p));
        const int dim = static_cast<int>(sigma.rows());
        return CovarianceModel::from_matrix(std::move(sigma), make_mask(mask_spec, dim));
    }
    if (p < 1) throw ArgumentError("dimension must be positive");
    Mask mask = make_mask(mask_spec, p);
    if (std::holds_alternative<IdentityCov>(kind)) return CovarianceModel::identity(p, std::move(mask));

    double rho = 0.0;
    int block = p;
    if (auto* a = std::get_if<Ar1Cov>(&kind)) {
        rho = a->rho;
    } else {
        const auto& b = std::get<BlockAr1Cov>(kind);
        rho = b.rho;
        block = b.block_size;
        if (block < 1) throw ArgumentError("block size must be positive");
    }
    if (!(std::abs(rho) < 1.0)) throw ArgumentError("AR(1) correlation must satisfy |rho| < 1");

    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
    for (int start = 0; start < p; start += block) {
        const int end = std::min(p, start + block);
        for (int i = start; i < end; ++i)
            for (int j = start; j < end; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
    }
    return CovarianceModel::from_matrix(std::move(sigma), std::move(mask));
}

SpectrumSummary spectrum_summary(const CovarianceModel& cov) {
    SpectrumSummary s{};
    const double p = cov.dim();
    const Eigen::ArrayXd ev = cov.eigenvalues().array();
    s.omega[0] = ev.sum() / p;
    s.omega[1] = ev.square().sum() / p;
    s.omega[2] = ev.cube().sum() / p;
    for (int j = 0; j < 3; ++j) s.gamma[j] = cov.masked_power_diagonal(j + 1).sum() / p;
    s.m_over_p = cov.mask_fraction();
    return s;
}

ResolventSummary resolvent_summary(const CovarianceModel& cov, double m_value, double m_prime,
                                   double aspect_ratio, double lambda) {
    if (!(m_value > 0.0) || !std::isfinite(m_value))
        throw ArgumentError("resolvent_summary: Stieltjes value must be positive");
    const double p = cov.dim();
    const Eigen::ArrayXd s = cov.eigenvalues().array();
    const Eigen::ArrayXd o = cov.overlaps().array();
    const Eigen::ArrayXd a = m_value * s;
    const Eigen::ArrayXd r = 1.0 / (1.0 + a);
    const Eigen::ArrayXd r2 = r.square();

    ResolventSummary out{};
    out.pi[0] = r.sum() / p;
    out.pi[1] = r2.sum() / p;
    out.xi[0] = (o * r).sum() / p;
    out.xi[1] = (o * r2).sum() / p;
    // (𝔪γ₁ + ξ₁ − m/p)/𝔪², (1 − 2π₁ + π₂)/𝔪² and (3ξ₁ − ξ₂ + 𝔪γ₁ − 2m/p)/𝔪³
    // reduce termwise to the sums below; the raw forms cancel badly as 𝔪 → 0.
    out.rho[0] = (o * s.square() * r).sum() / p;
    out.rho[1] = (s.square() * r2).sum() / p;
    out.rho[2] = (o * s.cube() * r2).sum() / p;
    out.ell[0] = out.pi[0];
    out.ell[1] = out.pi[1];
    out.eth[0] = out.xi[0];
    out.eth[1] = out.xi[1];
    out.one_minus_ell1 = (a * r).sum() / p;
    out.ell_gap = (a * r2).sum() / p;
    out.mask_minus_eth1 = (o * a * r).sum() / p;
    out.eth_gap = (o * a * r2).sum() / p;
    out.g_factor = 1.0 - out.one_minus_ell1 * aspect_ratio;
    out.h_factor = aspect_ratio * (out.ell[0] - (lambda * m_prime / m_value) * out.ell_gap);
    return out;
}

Eigen::VectorXd mask_overlap(const CovarianceModel& cov) { return cov.overlaps(); }

}  // namespace prsclt
