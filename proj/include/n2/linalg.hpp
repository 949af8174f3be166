#pragma once

#include <map>
#include <optional>
#include <vector>

#include "n2/rational.hpp"

namespace n2 {

// Sparse row vector: column -> nonzero entry.
using SparseRow = std::map<int, QQ>;

// Exact rational matrix, sparse rows. No stored zeros.
struct RationalMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<SparseRow> row;

    RationalMatrix() = default;
    RationalMatrix(int r, int c) : rows(r), cols(c), row(r) {}

    void set(int r, int c, const QQ& v) {
        if (v == 0)
            row[r].erase(c);
        else
            row[r][c] = v;
    }
    QQ get(int r, int c) const {
        auto it = row[r].find(c);
        return it == row[r].end() ? QQ(0) : it->second;
    }
    std::size_t nnz() const {
        std::size_t n = 0;
        for (auto& r : row) n += r.size();
        return n;
    }
};

struct RrefResult {
    int rank = 0;
    std::vector<int> pivot_cols;   // ascending
    RationalMatrix reduced;        // rank nonzero rows first, pivots normalized to 1
};

// Reduced row-echelon form. Deterministic: pivots chosen scanning columns in
// order, first available row. Forward pass is fraction-free on cleared
// denominators; pivots are normalized at the end.
RrefResult rref(const RationalMatrix& m);

// Basis of the right nullspace. count = cols - rank; each vector has its
// first nonzero entry equal to 1, ordered by free column.
std::vector<std::vector<QQ>> nullspace(const RationalMatrix& m);

// Exact coordinates of v in span(vectors), or nullopt.
std::optional<std::vector<QQ>> membership(const std::vector<std::vector<QQ>>& span,
                                          const std::vector<QQ>& v);

// Incremental span for closure loops: rows kept in reduced form.
class SpanBuilder {
  public:
    explicit SpanBuilder(int cols) : cols_(cols) {}

    // Reduces v against the current span; if a nonzero remainder survives it
    // is added as a new row. Returns true when the span grew.
    bool add(const SparseRow& v);
    bool contains(const SparseRow& v) const;
    // Remainder of v modulo the span (pivot coordinates eliminated).
    SparseRow reduce(const SparseRow& v) const;

    int dim() const { return static_cast<int>(rows_.size()); }
    int cols() const { return cols_; }
    const std::vector<SparseRow>& rows() const { return rows_; }
    const std::map<int, int>& pivots() const { return pivot_of_col_; }

  private:
    int cols_;
    std::vector<SparseRow> rows_;       // each with pivot normalized to 1
    std::map<int, int> pivot_of_col_;   // pivot column -> row index
};

}  // namespace n2
