#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

// Test-only reference implementations, deliberately independent of the
// library's algorithmic routes: exhaustive enumeration instead of dynamic
// programming, full matrices instead of rolling rows, dense vectors instead
// of feature hashing.

namespace oracles {

// LCS by enumerating every subsequence of the shorter side and checking it
// against the longer side. Exponential; inputs must stay tiny.
template <typename T>
std::size_t lcs_brute_force(const std::vector<T>& a, const std::vector<T>& b) {
    const std::vector<T>& lo = a.size() <= b.size() ? a : b;
    const std::vector<T>& hi = a.size() <= b.size() ? b : a;
    std::size_t best = 0;
    for (std::uint64_t mask = 0; mask < (1ull << lo.size()); ++mask) {
        std::vector<T> sub;
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (mask & (1ull << i)) sub.push_back(lo[i]);
        if (sub.size() <= best) continue;
        std::size_t j = 0;
        for (std::size_t i = 0; i < hi.size() && j < sub.size(); ++i)
            if (hi[i] == sub[j]) ++j;
        if (j == sub.size()) best = sub.size();
    }
    return best;
}

// Full-matrix Levenshtein.
template <typename T>
std::size_t levenshtein_full_matrix(const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    return d[a.size()][b.size()];
}

// Exhaustive search over span-removal sequences: repeatedly remove any
// common contiguous run longer than min_len from both sides, maximizing the
// total removed length. This is the search space the greedy ACS walks.
inline std::size_t acs_exhaustive(std::vector<std::string> a, std::vector<std::string> b,
                                  std::size_t min_len) {
    std::size_t best = 0;
    for (std::size_t ai = 0; ai < a.size(); ++ai) {
        for (std::size_t bi = 0; bi < b.size(); ++bi) {
            std::size_t len = 0;
            while (ai + len < a.size() && bi + len < b.size() && a[ai + len] == b[bi + len]) ++len;
            for (std::size_t take = min_len + 1; take <= len; ++take) {
                std::vector<std::string> a2 = a, b2 = b;
                a2.erase(a2.begin() + static_cast<std::ptrdiff_t>(ai),
                         a2.begin() + static_cast<std::ptrdiff_t>(ai + take));
                b2.erase(b2.begin() + static_cast<std::ptrdiff_t>(bi),
                         b2.begin() + static_cast<std::ptrdiff_t>(bi + take));
                best = std::max(best, take + acs_exhaustive(std::move(a2), std::move(b2), min_len));
            }
        }
    }
    return best;
}

template <typename T>
double exact_jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const T& x : a) inter += b.count(x);
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Dense character-3-gram cosine (no hashing).
inline double dense_3gram_cosine(const std::string& x, const std::string& y) {
    auto grams = [](const std::string& s) {
        std::map<std::string, double> m;
        if (s.size() < 3) {
            if (!s.empty()) m[s] = 1.0;
            return m;
        }
        for (std::size_t i = 0; i + 3 <= s.size(); ++i) m[s.substr(i, 3)] += 1.0;
        return m;
    };
    std::map<std::string, double> gx = grams(x), gy = grams(y);
    double dotp = 0.0, nx = 0.0, ny = 0.0;
    for (const auto& [g, c] : gx) {
        nx += c * c;
        auto it = gy.find(g);
        if (it != gy.end()) dotp += c * it->second;
    }
    for (const auto& [g, c] : gy) ny += c * c;
    if (nx == 0.0 || ny == 0.0) return 0.0;
    return dotp / (std::sqrt(nx) * std::sqrt(ny));
}

// Win-rate by direct pairwise enumeration over a dense score table
// values[method][unit], with one direction flag per unit.
inline std::vector<double> win_rate_enumeration(const std::vector<std::vector<double>>& values,
                                                const std::vector<bool>& higher_better) {
    const std::size_t m = values.size();
    std::vector<double> rates(m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        double opponent_sum = 0.0;
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            double wins = 0.0;
            for (std::size_t u = 0; u < values[a].size(); ++u) {
                if (values[a][u] == values[b][u])
                    wins += 0.5;
                else if (higher_better[u] ? values[a][u] > values[b][u] : values[a][u] < values[b][u])
                    wins += 1.0;
            }
            opponent_sum += wins / static_cast<double>(values[a].size());
        }
        rates[a] = opponent_sum / static_cast<double>(m - 1);
    }
    return rates;
}

}  // namespace oracles
