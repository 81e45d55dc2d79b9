#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pgtail/weiszfeld.hpp"

namespace pgtail {

// A contiguous slice of the flat parameter vector treated as one unit by the
// robust aggregator (e.g. actor-side parameters vs critic-side parameters).
struct ParamPartition {
    std::size_t offset = 0;
    std::size_t len = 0;
};

// Contiguous block boundaries for splitting n samples into b blocks of
// floor(n/b); the surplus tail is dropped.
struct BlockLayout {
    std::size_t block_len = 0;
    int b = 0;

    static BlockLayout make(std::size_t n, int b) {
        if (b <= 0) throw std::invalid_argument("BlockLayout: block count must be positive");
        if (static_cast<std::size_t>(b) > n)
            throw std::invalid_argument("BlockLayout: more blocks than samples");
        return BlockLayout{n / static_cast<std::size_t>(b), b};
    }
    std::size_t begin(int k) const { return static_cast<std::size_t>(k) * block_len; }
    std::size_t used() const { return block_len * static_cast<std::size_t>(b); }
};

// Given b block-mean gradients (rows of block_grads, each n_params long),
// return the aggregated gradient: within each partition the geometric median
// of the b block slices, computed independently per partition. Entries not
// covered by any partition stay zero.
inline std::vector<double> robust_aggregate(const double* block_grads, int b, std::size_t n_params,
                                            const std::vector<ParamPartition>& partitions,
                                            int weiszfeld_iterations = 100) {
    if (b <= 0) throw std::invalid_argument("robust_aggregate: block count must be positive");
    std::vector<double> out(n_params, 0.0);
    std::vector<double> buf;
    for (const auto& part : partitions) {
        if (part.offset + part.len > n_params)
            throw std::invalid_argument("robust_aggregate: partition out of range");
        if (part.len == 0) continue;
        buf.resize(static_cast<std::size_t>(b) * part.len);
        for (int k = 0; k < b; ++k) {
            const double* row = block_grads + static_cast<std::size_t>(k) * n_params + part.offset;
            double* dst = buf.data() + static_cast<std::size_t>(k) * part.len;
            for (std::size_t j = 0; j < part.len; ++j) dst[j] = row[j];
        }
        WeiszfeldResult res =
            weiszfeld(buf.data(), static_cast<std::size_t>(b), part.len, weiszfeld_iterations);
        for (std::size_t j = 0; j < part.len; ++j) out[part.offset + j] = res.point[j];
    }
    return out;
}

}  // namespace pgtail
