// hilbert.hpp - tensor-product spin spaces, local spin matrices, sparse operators,
// site embeddings and fixed-magnetization sector bases.
//
// Basis convention: a product state is a mixed-radix integer over the site
// dimensions with vertex 0 as the most significant digit, so that embedding
// A_0, A_1, ... at sites 0, 1, ... reproduces kron(A_0, A_1, ...). Digit d at a
// site of spin s carries S^3 eigenvalue m = s - d (descending order).

#pragma once

#include "spinlab/core.hpp"
#include "spinlab/lattice.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

using StateIndex = std::uint64_t;

// ------------------------------------------------------------------ SpinSpace

class SpinSpace {
public:
    static constexpr StateIndex kMaxDim = StateIndex{1} << 40;

    explicit SpinSpace(std::vector<HalfInteger> spins) : spins_(std::move(spins)) {
        if (spins_.empty()) throw DomainError("SpinSpace: no sites");
        dims_.reserve(spins_.size());
        for (auto s : spins_) {
            if (s.twice() < 1) throw DomainError("SpinSpace: site dimension must be >= 2");
            dims_.push_back(s.twice() + 1);
        }
        strides_.assign(dims_.size(), 1);
        total_ = 1;
        for (std::size_t k = dims_.size(); k-- > 0;) {
            strides_[k] = total_;
            if (total_ > kMaxDim / static_cast<StateIndex>(dims_[k])) {
                throw ResourceError("SpinSpace: total dimension exceeds 2^40", kMaxDim);
            }
            total_ *= static_cast<StateIndex>(dims_[k]);
        }
    }

    explicit SpinSpace(const SpinGraph& g) : SpinSpace(g.spins()) {}

    static SpinSpace uniform(int L, HalfInteger s) { return SpinSpace(std::vector<HalfInteger>(L, s)); }

    int num_sites() const noexcept { return static_cast<int>(dims_.size()); }
    const std::vector<int>& site_dims() const noexcept { return dims_; }
    int site_dim(Vertex x) const { return dims_.at(x); }
    HalfInteger site_spin(Vertex x) const { return spins_.at(x); }
    const std::vector<HalfInteger>& spins() const noexcept { return spins_; }
    StateIndex total_dim() const noexcept { return total_; }
    StateIndex stride(Vertex x) const { return strides_.at(x); }
    int max_site_dim() const noexcept { return *std::max_element(dims_.begin(), dims_.end()); }

    /// Sum of site spins (largest achievable total S^3).
    HalfInteger max_magnetization() const noexcept {
        int t = 0;
        for (auto s : spins_) t += s.twice();
        return half(t);
    }

    int digit(StateIndex index, Vertex x) const noexcept {
        return static_cast<int>((index / strides_[x]) % static_cast<StateIndex>(dims_[x]));
    }

    std::vector<int> decode(StateIndex index) const {
        if (index >= total_) throw DomainError("decode: index out of range");
        std::vector<int> d(dims_.size());
        for (std::size_t k = 0; k < dims_.size(); ++k) d[k] = digit(index, static_cast<Vertex>(k));
        return d;
    }

    StateIndex encode(std::span<const int> digits) const {
        if (digits.size() != dims_.size()) throw DomainError("encode: wrong number of digits");
        StateIndex idx = 0;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            if (digits[k] < 0 || digits[k] >= dims_[k]) throw DomainError("encode: digit out of range");
            idx += static_cast<StateIndex>(digits[k]) * strides_[k];
        }
        return idx;
    }

    /// Twice the S^3 eigenvalue of a product basis state.
    int twice_magnetization(StateIndex index) const noexcept {
        int t = 0;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            t += spins_[k].twice() - 2 * digit(index, static_cast<Vertex>(k));
        }
        return t;
    }

private:
    std::vector<HalfInteger> spins_;
    std::vector<int> dims_;
    std::vector<StateIndex> strides_;
    StateIndex total_ = 1;
};

// ------------------------------------------------------------ spin matrices

struct SpinMatrices {
    Matrix S1, S2, S3, Splus, Sminus;
};

/// Standard spin-s matrices in the basis m = s, s-1, ..., -s.
inline SpinMatrices spin_matrices(HalfInteger s) {
    if (s.twice() < 1) throw DomainError("spin_matrices: spin must be a positive half-integer, got " + s.str());
    const int n = s.twice() + 1;
    const double sv = s.value();
    SpinMatrices m;
    m.S3 = Matrix::Zero(n, n);
    m.Splus = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double mz = sv - i;
        m.S3(i, i) = mz;
        if (i > 0) m.Splus(i - 1, i) = std::sqrt(sv * (sv + 1) - mz * (mz + 1));
    }
    m.Sminus = m.Splus.adjoint();
    m.S1 = 0.5 * (m.Splus + m.Sminus);
    m.S2 = cplx(0, -0.5) * (m.Splus - m.Sminus);
    return m;
}

inline SpinMatrices spin_matrices(double s) { return spin_matrices(HalfInteger::from_double(s)); }

/// kron(A, B) with A as the more significant factor.
inline Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

// ------------------------------------------------------------ SparseOperator

/// Square sparse operator on a spin space or a sector of one. Entries with
/// magnitude <= 1e-15 are never stored. A Hermitian flag, when set, is verified
/// at construction to 1e-12.
class SparseOperator {
public:
    using Storage = Eigen::SparseMatrix<cplx, Eigen::RowMajor, std::int64_t>;
    using Triplet = Eigen::Triplet<cplx, std::int64_t>;

    SparseOperator() = default;

    SparseOperator(Storage m, bool hermitian) : m_(std::move(m)), hermitian_(hermitian) {
        if (m_.rows() != m_.cols()) throw DomainError("SparseOperator: matrix must be square");
        m_.prune([](const Eigen::Index&, const Eigen::Index&, const cplx& v) { return std::abs(v) > kZeroThreshold; });
        m_.makeCompressed();
        if (hermitian_) {
            const double defect = hermiticity_defect();
            if (defect >= kHermitianTol) {
                throw DomainError("SparseOperator: flagged Hermitian but |M - M^*| = " + std::to_string(defect));
            }
        }
    }

    static SparseOperator from_triplets(Eigen::Index dim, const std::vector<Triplet>& t, bool hermitian) {
        Storage m(dim, dim);
        m.setFromTriplets(t.begin(), t.end());
        return SparseOperator(std::move(m), hermitian);
    }

    static SparseOperator from_dense(const Matrix& d, bool hermitian) {
        if (d.rows() != d.cols()) throw DomainError("from_dense: matrix must be square");
        std::vector<Triplet> t;
        for (Eigen::Index i = 0; i < d.rows(); ++i)
            for (Eigen::Index j = 0; j < d.cols(); ++j)
                if (std::abs(d(i, j)) > kZeroThreshold) t.emplace_back(i, j, d(i, j));
        return from_triplets(d.rows(), t, hermitian);
    }

    static SparseOperator identity(Eigen::Index dim) {
        Storage m(dim, dim);
        m.setIdentity();
        return SparseOperator(std::move(m), true);
    }

    static SparseOperator zero(Eigen::Index dim) { return SparseOperator(Storage(dim, dim), true); }

    Eigen::Index dim() const noexcept { return m_.rows(); }
    Eigen::Index nonzeros() const noexcept { return m_.nonZeros(); }
    const Storage& storage() const noexcept { return m_; }
    bool hermitian_flag() const noexcept { return hermitian_; }

    double hermiticity_defect() const {
        Storage diff = Storage(m_.adjoint()) - m_;
        double worst = 0.0;
        for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
            for (Storage::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
        return worst;
    }

    bool is_real() const {
        for (Eigen::Index k = 0; k < m_.outerSize(); ++k)
            for (Storage::InnerIterator it(m_, k); it; ++it)
                if (it.value().imag() != 0.0) return false;
        return true;
    }

    Vector apply(const Vector& v) const {
        if (v.size() != dim()) throw DomainError("apply: dimension mismatch");
        return m_ * v;
    }

    Matrix dense() const { return Matrix(m_); }

    SparseOperator adjoint() const { return SparseOperator(Storage(m_.adjoint()), hermitian_); }

    double frobenius_norm() const { return m_.norm(); }

    friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
        a.check_same(b);
        return SparseOperator(Storage(a.m_ + b.m_), a.hermitian_ && b.hermitian_);
    }
    friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
        a.check_same(b);
        return SparseOperator(Storage(a.m_ - b.m_), a.hermitian_ && b.hermitian_);
    }
    friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
        a.check_same(b);
        return SparseOperator(Storage(a.m_ * b.m_), false);
    }
    friend SparseOperator operator*(cplx c, const SparseOperator& a) {
        return SparseOperator(Storage(c * a.m_), a.hermitian_ && c.imag() == 0.0);
    }

    /// Re-asserts (and verifies) Hermiticity, e.g. after a product known to be Hermitian.
    SparseOperator as_hermitian() const { return SparseOperator(m_, true); }

private:
    void check_same(const SparseOperator& o) const {
        if (dim() != o.dim()) throw DomainError("SparseOperator: dimension mismatch");
    }

    Storage m_;
    bool hermitian_ = false;
};

/// Commutator [A, B].
inline SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) { return a * b - b * a; }

/// Largest |entry| of a sparse operator.
inline double max_abs_entry(const SparseOperator& a) {
    double worst = 0.0;
    const auto& m = a.storage();
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseOperator::Storage::InnerIterator it(m, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
}

// ------------------------------------------------------------ sector bases

enum class SectorKind { Magnetization, ParticleNumber };

struct SectorLabel {
    SectorKind kind = SectorKind::Magnetization;
    HalfInteger value;  // total S^3 eigenvalue, or particle number (integer)

    std::string str() const {
        return (kind == SectorKind::Magnetization ? "M=" : "n=") + value.str();
    }
    auto operator<=>(const SectorLabel&) const = default;
};

/// Ordered (strictly increasing) list of product states sharing a quantum number.
class SectorBasis {
public:
    SectorBasis(SpinSpace parent, SectorLabel label, std::vector<StateIndex> states)
        : parent_(std::move(parent)), label_(label), states_(std::move(states)) {
        if (!std::is_sorted(states_.begin(), states_.end()) ||
            std::adjacent_find(states_.begin(), states_.end()) != states_.end()) {
            throw DomainError("SectorBasis: states must be strictly increasing");
        }
    }

    const SpinSpace& parent() const noexcept { return parent_; }
    const SectorLabel& label() const noexcept { return label_; }
    std::size_t size() const noexcept { return states_.size(); }
    const std::vector<StateIndex>& states() const noexcept { return states_; }
    StateIndex state(std::size_t i) const { return states_.at(i); }

    std::optional<std::size_t> index_of(StateIndex full) const noexcept {
        auto it = std::lower_bound(states_.begin(), states_.end(), full);
        if (it == states_.end() || *it != full) return std::nullopt;
        return static_cast<std::size_t>(it - states_.begin());
    }

    /// Sector coordinates -> full-space vector.
    Vector embed(const Vector& v) const {
        if (static_cast<std::size_t>(v.size()) != states_.size()) throw DomainError("embed: dimension mismatch");
        Vector full = Vector::Zero(static_cast<Eigen::Index>(parent_.total_dim()));
        for (std::size_t i = 0; i < states_.size(); ++i) full(static_cast<Eigen::Index>(states_[i])) = v(i);
        return full;
    }

private:
    SpinSpace parent_;
    SectorLabel label_;
    std::vector<StateIndex> states_;
};

namespace detail {

inline void check_achievable(const SpinSpace& space, HalfInteger M) {
    const int tmax = space.max_magnetization().twice();
    if (M.twice() > tmax || M.twice() < -tmax || (tmax - M.twice()) % 2 != 0) {
        throw EmptySectorError("magnetization " + M.str() + " is not achievable (S_max = " +
                               space.max_magnetization().str() + ")");
    }
}

inline std::vector<StateIndex> scan_sector(const SpinSpace& space, HalfInteger M) {
    std::vector<StateIndex> out;
    for (StateIndex i = 0; i < space.total_dim(); ++i)
        if (space.twice_magnetization(i) == M.twice()) out.push_back(i);
    return out;
}

/// Depth-first m-composition with site 0 outermost, which emits indices in increasing order.
inline std::vector<StateIndex> compose_sector(const SpinSpace& space, HalfInteger M) {
    const int L = space.num_sites();
    std::vector<int> tail(L + 1, 0);  // sum of 2s over sites k..L-1
    for (int k = L - 1; k >= 0; --k) tail[k] = tail[k + 1] + space.site_spin(k).twice();
    std::vector<StateIndex> out;
    auto rec = [&](auto&& self, int site, int remaining, StateIndex prefix) -> void {
        if (site == L) {
            if (remaining == 0) out.push_back(prefix);
            return;
        }
        const int two_s = space.site_spin(site).twice();
        for (int d = 0; d <= two_s; ++d) {
            const int rest = remaining - (two_s - 2 * d);
            if (rest > tail[site + 1] || rest < -tail[site + 1]) continue;
            self(self, site + 1, rest, prefix + static_cast<StateIndex>(d) * space.stride(site));
        }
    };
    rec(rec, 0, M.twice(), 0);
    return out;
}

}  // namespace detail

enum class SectorEnumeration { Automatic, Scan, Composition };

/// All product states with total S^3 = M, in increasing index order.
inline SectorBasis magnetization_sector(const SpinSpace& space, HalfInteger M,
                                        SectorEnumeration how = SectorEnumeration::Automatic) {
    detail::check_achievable(space, M);
    if (how == SectorEnumeration::Automatic) {
        how = space.total_dim() <= (StateIndex{1} << 22) ? SectorEnumeration::Scan : SectorEnumeration::Composition;
    }
    auto states = how == SectorEnumeration::Scan ? detail::scan_sector(space, M) : detail::compose_sector(space, M);
    return SectorBasis(space, {SectorKind::Magnetization, M}, std::move(states));
}

/// Achievable magnetizations, largest first.
inline std::vector<HalfInteger> magnetization_values(const SpinSpace& space) {
    std::vector<HalfInteger> out;
    const int tmax = space.max_magnetization().twice();
    for (int t = tmax; t >= -tmax; t -= 2) out.push_back(half(t));
    return out;
}

/// Number of product states with total S^3 = M, by convolution over sites (0 if unachievable).
inline StateIndex sector_dimension(const SpinSpace& space, HalfInteger M) {
    const int tmax = space.max_magnetization().twice();
    if (M.twice() > tmax || M.twice() < -tmax || (tmax - M.twice()) % 2 != 0) return 0;
    // count[k]: states whose spin-lowering steps from the top sum to k
    std::vector<StateIndex> count{1};
    for (int x = 0; x < space.num_sites(); ++x) {
        const int steps = space.site_spin(x).twice();
        std::vector<StateIndex> next(count.size() + steps, 0);
        for (std::size_t k = 0; k < count.size(); ++k)
            for (int d = 0; d <= steps; ++d) next[k + d] += count[k];
        count = std::move(next);
    }
    return count[static_cast<std::size_t>((tmax - M.twice()) / 2)];
}

/// Restriction of H to a sector. Any matrix element coupling the sector to its
/// complement above `leak_tol` raises SectorLeakError naming the entry.
inline SparseOperator restrict_to_sector(const SparseOperator& H, const SectorBasis& sector, double leak_tol = 1e-10) {
    if (static_cast<StateIndex>(H.dim()) != sector.parent().total_dim()) {
        throw DomainError("restrict_to_sector: operator dimension does not match sector's parent space");
    }
    std::vector<std::int64_t> position(static_cast<std::size_t>(H.dim()), -1);
    for (std::size_t i = 0; i < sector.size(); ++i) position[sector.state(i)] = static_cast<std::int64_t>(i);
    std::vector<SparseOperator::Triplet> t;
    const auto& m = H.storage();
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
        const bool row_in = position[r] >= 0;
        for (SparseOperator::Storage::InnerIterator it(m, r); it; ++it) {
            const bool col_in = position[it.col()] >= 0;
            if (row_in && col_in) {
                t.emplace_back(position[r], position[it.col()], it.value());
            } else if (row_in != col_in && std::abs(it.value()) > leak_tol) {
                throw SectorLeakError("operator leaks out of sector " + sector.label().str() + ": element (" +
                                          std::to_string(r) + "," + std::to_string(it.col()) +
                                          ") = " + std::to_string(std::abs(it.value())),
                                      static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(it.col()),
                                      std::abs(it.value()));
            }
        }
    }
    return SparseOperator::from_triplets(static_cast<Eigen::Index>(sector.size()), t, H.hermitian_flag());
}

// ------------------------------------------------------------ product terms

/// A matrix acting on the joint space of `sites` (first listed site most significant).
struct LocalFactor {
    std::vector<Vertex> sites;
    Matrix matrix;
};

/// coeff * (F_1 (x) F_2 (x) ...) over disjoint site sets, identity elsewhere.
struct ProductTerm {
    cplx coeff{1.0, 0.0};
    std::vector<LocalFactor> factors;
};

/// Product of two terms built from single-site factors: per-site matrix product.
inline ProductTerm multiply(const ProductTerm& a, const ProductTerm& b) {
    std::vector<std::pair<Vertex, Matrix>> per_site;
    auto find = [&](Vertex x) -> Matrix* {
        for (auto& [v, m] : per_site)
            if (v == x) return &m;
        return nullptr;
    };
    for (const auto* t : {&a, &b}) {
        for (const auto& f : t->factors) {
            if (f.sites.size() != 1) throw DomainError("multiply: only single-site factors are supported");
            if (Matrix* m = find(f.sites[0])) {
                *m = (*m) * f.matrix;  // a's factor acts after b's, i.e. leftmost
            } else {
                per_site.emplace_back(f.sites[0], f.matrix);
            }
        }
    }
    std::sort(per_site.begin(), per_site.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    ProductTerm out;
    out.coeff = a.coeff * b.coeff;
    for (auto& [v, m] : per_site) out.factors.push_back({{v}, std::move(m)});
    return out;
}

namespace detail {

struct CompiledFactor {
    std::vector<Vertex> sites;
    std::vector<StateIndex> local_strides;
    std::vector<std::vector<std::pair<int, cplx>>> column_nonzeros;
    std::vector<StateIndex> row_offset;  // sum_k digit_k(r) * stride(site_k)
};

inline CompiledFactor compile(const SpinSpace& space, const LocalFactor& f) {
    CompiledFactor c;
    c.sites = f.sites;
    StateIndex local_dim = 1;
    for (Vertex x : f.sites) {
        if (x < 0 || x >= space.num_sites()) throw DomainError("operator support references unknown site " + std::to_string(x));
        local_dim *= static_cast<StateIndex>(space.site_dim(x));
    }
    {
        auto sorted = f.sites;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DomainError("operator support lists a site twice");
    }
    if (static_cast<StateIndex>(f.matrix.rows()) != local_dim || static_cast<StateIndex>(f.matrix.cols()) != local_dim) {
        throw DomainError("local matrix is " + std::to_string(f.matrix.rows()) + "x" + std::to_string(f.matrix.cols()) +
                          " but its support has dimension " + std::to_string(local_dim));
    }
    c.local_strides.assign(f.sites.size(), 1);
    StateIndex s = 1;
    for (std::size_t k = f.sites.size(); k-- > 0;) {
        c.local_strides[k] = s;
        s *= static_cast<StateIndex>(space.site_dim(f.sites[k]));
    }
    c.column_nonzeros.resize(local_dim);
    c.row_offset.resize(local_dim);
    for (StateIndex r = 0; r < local_dim; ++r) {
        StateIndex off = 0;
        for (std::size_t k = 0; k < f.sites.size(); ++k) {
            const auto dk = (r / c.local_strides[k]) % static_cast<StateIndex>(space.site_dim(f.sites[k]));
            off += dk * space.stride(f.sites[k]);
        }
        c.row_offset[r] = off;
    }
    for (Eigen::Index col = 0; col < f.matrix.cols(); ++col)
        for (Eigen::Index row = 0; row < f.matrix.rows(); ++row)
            if (std::abs(f.matrix(row, col)) > kZeroThreshold)
                c.column_nonzeros[col].emplace_back(static_cast<int>(row), f.matrix(row, col));
    return c;
}

struct CompiledTerm {
    cplx coeff;
    std::vector<CompiledFactor> factors;
};

/// Accumulates coeff * term |state> into `out` as (full index, amplitude) pairs.
inline void apply_term(const SpinSpace& space, const CompiledTerm& term, StateIndex state,
                       std::vector<std::pair<StateIndex, cplx>>& out, std::vector<std::pair<StateIndex, cplx>>& scratch) {
    out.clear();
    out.emplace_back(state, term.coeff);
    for (const auto& f : term.factors) {
        scratch.clear();
        for (auto [idx, amp] : out) {
            StateIndex col = 0;
            StateIndex base = idx;
            for (std::size_t k = 0; k < f.sites.size(); ++k) {
                const auto d = static_cast<StateIndex>(space.digit(idx, f.sites[k]));
                col += d * f.local_strides[k];
                base -= d * space.stride(f.sites[k]);
            }
            for (auto [row, v] : f.column_nonzeros[col]) scratch.emplace_back(base + f.row_offset[row], amp * v);
        }
        std::swap(out, scratch);
    }
}

}  // namespace detail

/// Sums product terms into a sparse operator on the full space (sector == nullptr)
/// or on a sector. Terms must map the sector into itself; violations raise
/// SectorLeakError. Duplicates are summed in (column, term) order, so the result
/// is a deterministic function of the term sequence.
inline SparseOperator assemble_terms(const SpinSpace& space, std::span<const ProductTerm> terms,
                                     const SectorBasis* sector, bool hermitian) {
    std::vector<detail::CompiledTerm> compiled;
    compiled.reserve(terms.size());
    for (const auto& t : terms) {
        detail::CompiledTerm c{t.coeff, {}};
        std::vector<Vertex> all;
        for (const auto& f : t.factors) {
            c.factors.push_back(detail::compile(space, f));
            all.insert(all.end(), f.sites.begin(), f.sites.end());
        }
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end())
            throw DomainError("product term factors must act on disjoint sites");
        compiled.push_back(std::move(c));
    }
    const StateIndex dim = sector ? sector->size() : space.total_dim();
    std::vector<SparseOperator::Triplet> triplets;
    std::vector<std::pair<StateIndex, cplx>> out, scratch;
    for (StateIndex col = 0; col < dim; ++col) {
        const StateIndex state = sector ? sector->state(col) : col;
        for (const auto& term : compiled) {
            detail::apply_term(space, term, state, out, scratch);
            for (auto [row_full, amp] : out) {
                if (std::abs(amp) <= kZeroThreshold) continue;
                StateIndex row = row_full;
                if (sector) {
                    auto pos = sector->index_of(row_full);
                    if (!pos) {
                        throw SectorLeakError("term maps sector " + sector->label().str() + " outside itself",
                                              row_full, state, std::abs(amp));
                    }
                    row = *pos;
                }
                triplets.emplace_back(static_cast<std::int64_t>(row), static_cast<std::int64_t>(col), amp);
            }
        }
    }
    return SparseOperator::from_triplets(static_cast<Eigen::Index>(dim), triplets, hermitian);
}

/// Kronecker embedding of single-site matrices at distinct vertices (identity elsewhere).
inline SparseOperator embed_at(const SpinSpace& space, std::span<const std::pair<Vertex, Matrix>> ops) {
    ProductTerm t;
    for (const auto& [x, m] : ops) t.factors.push_back({{x}, m});
    bool herm = true;
    for (const auto& [x, m] : ops) herm = herm && (m - m.adjoint()).cwiseAbs().maxCoeff() < kHermitianTol;
    return assemble_terms(space, std::span<const ProductTerm>(&t, 1), nullptr, herm);
}

inline SparseOperator embed_at(const SpinSpace& space, Vertex x, const Matrix& m) {
    std::pair<Vertex, Matrix> op{x, m};
    return embed_at(space, std::span<const std::pair<Vertex, Matrix>>(&op, 1));
}

}  // namespace spinlab
