// Reed-Muller RM(r, m) codes with Reed majority-logic decoding.
//
// Generator rows are evaluations of the monomials of degree <= r over
// {0,1}^m, ordered degree-ascending then lexicographically on the variable
// index tuple; variable x_i is bit i of the column index.  The Reed decoder
// votes on characteristic sums from degree r down to 0, ties voting 0, and
// is guaranteed to correct up to floor((2^{m-r} - 1) / 2) errors.

#pragma once

#include <cstdint>
#include <vector>

namespace fblab::rm {

struct RmCode {
    int r = 0;
    int m = 0;
    int n_code = 0;  // 2^m
    int k_info = 0;  // sum_{i<=r} C(m, i)
    std::vector<std::vector<int>> monomials;       // variable index lists
    std::vector<std::vector<std::uint8_t>> generator;  // k_info rows of n_code bits

    static RmCode make(int r, int m);

    int guaranteed_corrections() const { return ((1 << (m - r)) - 1) / 2; }
    double rate() const { return static_cast<double>(k_info) / n_code; }
};

std::vector<std::uint8_t> rm_encode(const std::vector<std::uint8_t>& msg,
                                    const RmCode& code);

std::vector<std::uint8_t> rm_decode_reed(const std::vector<std::uint8_t>& hard,
                                         const RmCode& code);

}  // namespace fblab::rm
