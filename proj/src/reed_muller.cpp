#include "fblab/reed_muller.hpp"

#include <stdexcept>

namespace fblab::rm {

namespace {

// All size-d subsets of {0..m-1} in lexicographic order of the index tuple.
void subsets_of_degree(int m, int d, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(d);
    if (d == 0) {
        out.push_back({});
        return;
    }
    // iterative combination enumeration
    for (int i = 0; i < d; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        int i = d - 1;
        while (i >= 0 && cur[i] == m - d + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < d; ++j) cur[j] = cur[j - 1] + 1;
    }
}

std::vector<std::uint8_t> monomial_row(const std::vector<int>& vars, int n_code) {
    std::vector<std::uint8_t> row(n_code, 1);
    for (int j = 0; j < n_code; ++j)
        for (int v : vars)
            if (((j >> v) & 1) == 0) {
                row[j] = 0;
                break;
            }
    return row;
}

}  // namespace

RmCode RmCode::make(int r, int m) {
    if (m < 1 || m > 20 || r < 0 || r > m)
        throw std::domain_error("RmCode: need 0 <= r <= m, m >= 1");
    RmCode code;
    code.r = r;
    code.m = m;
    code.n_code = 1 << m;
    for (int d = 0; d <= r; ++d) subsets_of_degree(m, d, code.monomials);
    code.k_info = static_cast<int>(code.monomials.size());
    code.generator.reserve(code.k_info);
    for (const auto& vars : code.monomials)
        code.generator.push_back(monomial_row(vars, code.n_code));
    return code;
}

std::vector<std::uint8_t> rm_encode(const std::vector<std::uint8_t>& msg,
                                    const RmCode& code) {
    if (msg.size() != static_cast<std::size_t>(code.k_info))
        throw std::invalid_argument("rm_encode: message length != K_c");
    std::vector<std::uint8_t> x(code.n_code, 0);
    for (int i = 0; i < code.k_info; ++i)
        if (msg[i] & 1)
            for (int j = 0; j < code.n_code; ++j) x[j] ^= code.generator[i][j];
    return x;
}

std::vector<std::uint8_t> rm_decode_reed(const std::vector<std::uint8_t>& hard,
                                         const RmCode& code) {
    if (hard.size() != static_cast<std::size_t>(code.n_code))
        throw std::invalid_argument("rm_decode_reed: word length != N_c");
    std::vector<std::uint8_t> w = hard;
    std::vector<std::uint8_t> msg(code.k_info, 0);

    // Monomial indices grouped by degree, processed highest degree first.
    int idx_end = code.k_info;
    for (int d = code.r; d >= 0; --d) {
        int idx_begin = idx_end;
        while (idx_begin > 0 &&
               static_cast<int>(code.monomials[idx_begin - 1].size()) == d)
            --idx_begin;

        for (int mi = idx_begin; mi < idx_end; ++mi) {
            const auto& vars = code.monomials[mi];
            // Pack column bits outside `vars` into a coset index and XOR the
            // word over each coset of the subcube spanned by `vars`.
            const int cosets = 1 << (code.m - d);
            std::vector<std::uint8_t> sums(cosets, 0);
            std::vector<int> outside;
            for (int v = 0; v < code.m; ++v) {
                bool in = false;
                for (int s : vars)
                    if (s == v) in = true;
                if (!in) outside.push_back(v);
            }
            for (int j = 0; j < code.n_code; ++j) {
                int bucket = 0;
                for (std::size_t b = 0; b < outside.size(); ++b)
                    bucket |= ((j >> outside[b]) & 1) << b;
                sums[bucket] ^= w[j];
            }
            int ones = 0;
            for (std::uint8_t s : sums) ones += s;
            msg[mi] = static_cast<std::uint8_t>(2 * ones > cosets);  // tie -> 0
        }

        // Peel the decided degree-d layer off the working word.
        for (int mi = idx_begin; mi < idx_end; ++mi)
            if (msg[mi])
                for (int j = 0; j < code.n_code; ++j)
                    w[j] ^= code.generator[mi][j];
        idx_end = idx_begin;
    }
    return msg;
}

}  // namespace fblab::rm
