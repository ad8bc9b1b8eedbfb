#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace prsclt {

using Mask = std::vector<bool>;

// Dense symmetric PSD covariance with a causal-variant mask. Immutable once
// built; all spectral data is computed eagerly at construction.
class CovarianceModel {
public:
    // Validates symmetry, PSD-ness and eigen reconstruction. Throws
    // ValidationError naming the failed check, ArgumentError on mask size.
    static CovarianceModel from_matrix(Eigen::MatrixXd sigma, Mask mask);
    static CovarianceModel identity(int p, Mask mask);

    int dim() const { return static_cast<int>(matrix_.rows()); }
    int mask_size() const { return static_cast<int>(mask_index_.size()); }
    double mask_fraction() const { return static_cast<double>(mask_size()) / dim(); }
    bool is_identity() const { return is_identity_; }

    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
    const Eigen::MatrixXd& sqrt_matrix() const { return sqrt_; }
    const Mask& causal_mask() const { return mask_; }
    const std::vector<int>& mask_index() const { return mask_index_; }
    // 0/1 indicator of the mask as a vector.
    const Eigen::VectorXd& mask_vector() const { return mask_vec_; }

    // Diagonal entries of Σ^power (power 1..3) restricted to the mask.
    const Eigen::VectorXd& masked_power_diagonal(int power) const;
    // Squared Frobenius norm of the masked block of Σ² (rows and columns on the mask).
    double masked_square_norm2() const { return sq_block_norm2_; }
    // ⟨u_i, I_m u_i⟩ in eigenvalue order.
    const Eigen::VectorXd& overlaps() const { return overlaps_; }

    // Masked block of U diag(f) Uᵀ for a spectral weight f (one entry per
    // eigenvalue, in eigenvalue order).
    Eigen::MatrixXd masked_spectral_block(const Eigen::VectorXd& f) const;
    // Full U diag(f) Uᵀ.
    Eigen::MatrixXd spectral_matrix(const Eigen::VectorXd& f) const;

private:
    CovarianceModel() = default;
    void finish();

    Eigen::MatrixXd matrix_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    Eigen::MatrixXd sqrt_;
    Mask mask_;
    std::vector<int> mask_index_;
    Eigen::VectorXd mask_vec_;
    Eigen::VectorXd masked_diag_[3];
    double sq_block_norm2_ = 0.0;
    Eigen::VectorXd overlaps_;
    bool is_identity_ = false;
};

struct IdentityCov {};
struct Ar1Cov {
    double rho;
};
struct BlockAr1Cov {
    int block_size;
    double rho;
};
struct FileCov {
    std::string path;
};
using CovSpec = std::variant<IdentityCov, Ar1Cov, BlockAr1Cov, FileCov>;

struct FirstM {
    int m;
};
struct RandomMask {
    int m;
    std::uint64_t seed;
};
struct FileMask {
    std::string path;
};
using MaskSpec = std::variant<FirstM, RandomMask, FileMask>;

CovarianceModel build_covariance(const CovSpec& kind, int p, const MaskSpec& mask_spec);

Mask make_mask(const MaskSpec& spec, int p);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

struct SpectrumSummary {
    double omega[3];
    double gamma[3];
    double m_over_p;
};

SpectrumSummary spectrum_summary(const CovarianceModel& cov);

struct ResolventSummary {
    double pi[2];
    double xi[2];
    double rho[3];
    double ell[2];
    double eth[2];
    double g_factor;
    double h_factor;
    // Cancellation-free differences, evaluated termwise on the spectrum:
    // 1 − ℓ₁, ℓ₁ − ℓ₂, m/p − ð₁ and ð₁ − ð₂.
    double one_minus_ell1;
    double ell_gap;
    double mask_minus_eth1;
    double eth_gap;
};

// Trace ratios of (I + 𝔪Σ)^{-i}. ℓ and ð coincide with π and ξ at the
// supplied 𝔪; 𝔤 and 𝔥 use φ and λ.
ResolventSummary resolvent_summary(const CovarianceModel& cov, double m_value, double m_prime,
                                   double aspect_ratio, double lambda);

Eigen::VectorXd mask_overlap(const CovarianceModel& cov);

}  // namespace prsclt
