#include "n2/linalg.hpp"

#include <algorithm>
#include <cassert>

namespace n2 {

namespace {

// Density threshold for switching to the dense elimination path. Performance
// only; both paths produce identical output.
constexpr double kDenseThreshold = 0.30;

RrefResult rref_dense(const RationalMatrix& m) {
    const int R = m.rows, C = m.cols;
    std::vector<std::vector<QQ>> a(R, std::vector<QQ>(C, QQ(0)));
    for (int r = 0; r < R; ++r)
        for (auto& [c, v] : m.row[r]) a[r][c] = v;

    // Clear denominators per row, then run fraction-free (Bareiss) forward
    // elimination to keep intermediate entries as integers.
    for (int r = 0; r < R; ++r) {
        mpz_class lcm = 1;
        for (auto& v : a[r])
            if (v != 0) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), v.get_den().get_mpz_t());
        if (lcm != 1)
            for (auto& v : a[r]) v *= QQ(lcm);
    }

    std::vector<int> pivot_cols;
    QQ prev_pivot(1);
    int lead = 0;
    for (int col = 0; col < C && lead < R; ++col) {
        int prow = -1;
        for (int r = lead; r < R; ++r)
            if (a[r][col] != 0) { prow = r; break; }
        if (prow < 0) continue;
        std::swap(a[lead], a[prow]);
        const QQ piv = a[lead][col];
        for (int r = lead + 1; r < R; ++r) {
            if (a[r][col] == 0) {
                if (prev_pivot != 1)
                    for (int c = col; c < C; ++c)
                        if (a[r][c] != 0) a[r][c] /= prev_pivot;
                continue;
            }
            const QQ factor = a[r][col];
            for (int c = col; c < C; ++c) {
                a[r][c] = (piv * a[r][c] - factor * a[lead][c]) / prev_pivot;
            }
        }
        prev_pivot = piv;
        pivot_cols.push_back(col);
        ++lead;
    }
    const int rank = static_cast<int>(pivot_cols.size());

    // Back-substitution with pivot normalization.
    for (int i = rank - 1; i >= 0; --i) {
        const int pc = pivot_cols[i];
        const QQ piv = a[i][pc];
        for (int c = pc; c < C; ++c)
            if (a[i][c] != 0) a[i][c] /= piv;
        for (int r = 0; r < i; ++r) {
            if (a[r][pc] == 0) continue;
            const QQ f = a[r][pc];
            for (int c = pc; c < C; ++c)
                if (a[i][c] != 0) a[r][c] -= f * a[i][c];
        }
    }

    RrefResult out;
    out.rank = rank;
    out.pivot_cols = pivot_cols;
    out.reduced = RationalMatrix(rank, C);
    for (int r = 0; r < rank; ++r)
        for (int c = 0; c < C; ++c)
            if (a[r][c] != 0) out.reduced.row[r][c] = a[r][c];
    return out;
}

RrefResult rref_sparse(const RationalMatrix& m) {
    // Plain rational elimination on sparse rows; pivots normalized on the
    // fly. Same deterministic pivot rule as the dense path.
    std::vector<SparseRow> rows = m.row;
    const int C = m.cols;
    std::vector<SparseRow> done;
    std::vector<int> pivot_cols;

    std::size_t begin = 0;
    for (int col = 0; col < C; ++col) {
        std::size_t prow = SIZE_MAX;
        for (std::size_t r = begin; r < rows.size(); ++r) {
            auto it = rows[r].begin();
            if (it != rows[r].end() && it->first == col) { prow = r; break; }
        }
        if (prow == SIZE_MAX) continue;
        std::swap(rows[begin], rows[prow]);
        SparseRow piv = rows[begin];
        const QQ pv = piv.begin()->second;
        if (pv != 1)
            for (auto& [c, v] : piv) v /= pv;
        for (std::size_t r = begin + 1; r < rows.size(); ++r) {
            auto it = rows[r].find(col);
            if (it == rows[r].end()) continue;
            const QQ f = it->second;
            for (auto& [c, v] : piv) {
                auto jt = rows[r].find(c);
                if (jt == rows[r].end()) {
                    rows[r][c] = -f * v;
                } else {
                    jt->second -= f * v;
                    if (jt->second == 0) rows[r].erase(jt);
                }
            }
        }
        done.push_back(std::move(piv));
        pivot_cols.push_back(col);
        ++begin;
    }

    // Back-substitution.
    for (int i = static_cast<int>(done.size()) - 1; i >= 0; --i) {
        const int pc = pivot_cols[i];
        for (int r = 0; r < i; ++r) {
            auto it = done[r].find(pc);
            if (it == done[r].end()) continue;
            const QQ f = it->second;
            for (auto& [c, v] : done[i]) {
                auto jt = done[r].find(c);
                if (jt == done[r].end()) {
                    done[r][c] = -f * v;
                } else {
                    jt->second -= f * v;
                    if (jt->second == 0) done[r].erase(jt);
                }
            }
        }
    }

    RrefResult out;
    out.rank = static_cast<int>(pivot_cols.size());
    out.pivot_cols = pivot_cols;
    out.reduced = RationalMatrix(out.rank, C);
    for (int r = 0; r < out.rank; ++r) out.reduced.row[r] = done[r];
    return out;
}

}  // namespace

RrefResult rref(const RationalMatrix& m) {
    if (m.rows == 0 || m.cols == 0) {
        RrefResult out;
        out.reduced = RationalMatrix(0, m.cols);
        return out;
    }
    const double density =
        static_cast<double>(m.nnz()) / (static_cast<double>(m.rows) * m.cols);
    if (density > kDenseThreshold) return rref_dense(m);
    return rref_sparse(m);
}

std::vector<std::vector<QQ>> nullspace(const RationalMatrix& m) {
    RrefResult rr = rref(m);
    std::vector<bool> is_pivot(m.cols, false);
    for (int c : rr.pivot_cols) is_pivot[c] = true;

    std::vector<std::vector<QQ>> basis;
    for (int free = 0; free < m.cols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<QQ> v(m.cols, QQ(0));
        v[free] = 1;
        for (int r = 0; r < rr.rank; ++r) {
            auto it = rr.reduced.row[r].find(free);
            if (it != rr.reduced.row[r].end()) v[rr.pivot_cols[r]] = -it->second;
        }
        // Normalize so the first nonzero entry is 1.
        for (auto& x : v)
            if (x != 0) {
                if (x != 1) {
                    const QQ s = x;
                    for (auto& y : v)
                        if (y != 0) y /= s;
                }
                break;
            }
        basis.push_back(std::move(v));
    }
    return basis;
}

std::optional<std::vector<QQ>> membership(const std::vector<std::vector<QQ>>& span,
                                          const std::vector<QQ>& v) {
    const int n = static_cast<int>(v.size());
    const int k = static_cast<int>(span.size());
    // Solve span^T x = v: build [span columns | v] and eliminate.
    RationalMatrix aug(n, k + 1);
    for (int j = 0; j < k; ++j) {
        if (static_cast<int>(span[j].size()) != n)
            throw std::invalid_argument("membership: inconsistent vector lengths");
        for (int i = 0; i < n; ++i)
            if (span[j][i] != 0) aug.row[i][j] = span[j][i];
    }
    for (int i = 0; i < n; ++i)
        if (v[i] != 0) aug.row[i][k] = v[i];

    RrefResult rr = rref(aug);
    std::vector<QQ> x(k, QQ(0));
    for (int r = 0; r < rr.rank; ++r) {
        const int pc = rr.pivot_cols[r];
        if (pc == k) return std::nullopt;  // inconsistent: pivot in the v column
        auto it = rr.reduced.row[r].find(k);
        x[pc] = it == rr.reduced.row[r].end() ? QQ(0) : it->second;
    }
    return x;
}

bool SpanBuilder::add(const SparseRow& v) {
    SparseRow r = reduce(v);
    if (r.empty()) return false;
    const QQ piv = r.begin()->second;
    if (piv != 1)
        for (auto& [c, x] : r) x /= piv;
    const int pc = r.begin()->first;
    // Keep existing rows reduced against the new pivot.
    for (auto& row : rows_) {
        auto it = row.find(pc);
        if (it == row.end()) continue;
        const QQ f = it->second;
        for (auto& [c, x] : r) {
            auto jt = row.find(c);
            if (jt == row.end()) {
                row[c] = -f * x;
            } else {
                jt->second -= f * x;
                if (jt->second == 0) row.erase(jt);
            }
        }
    }
    pivot_of_col_[pc] = static_cast<int>(rows_.size());
    rows_.push_back(std::move(r));
    return true;
}

SparseRow SpanBuilder::reduce(const SparseRow& v) const {
    // Rows are kept mutually reduced, so eliminating a pivot column only
    // introduces non-pivot columns; one elimination per pivot hit suffices.
    SparseRow r = v;
    while (true) {
        const SparseRow* prow = nullptr;
        QQ f;
        for (auto& [c, x] : r) {
            auto p = pivot_of_col_.find(c);
            if (p != pivot_of_col_.end()) {
                prow = &rows_[p->second];
                f = x;
                break;
            }
        }
        if (!prow) break;
        for (auto& [c, x] : *prow) {
            auto jt = r.find(c);
            if (jt == r.end()) {
                r[c] = -f * x;
            } else {
                jt->second -= f * x;
                if (jt->second == 0) r.erase(jt);
            }
        }
    }
    return r;
}

bool SpanBuilder::contains(const SparseRow& v) const { return reduce(v).empty(); }

}  // namespace n2
