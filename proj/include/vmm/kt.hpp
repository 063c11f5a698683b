#ifndef VMM_KT_HPP
#define VMM_KT_HPP

#include <cstdint>

namespace vmm {

inline constexpr double kt_alpha = 0.5;
// Volf's variant for decomposed CTW
inline constexpr double volf_alpha = 0.125;

/// Binary add-alpha counter. alpha = 1/2 is the Krichevsky-Trofimov estimator.
struct KtCounter {
    std::uint64_t n0 = 0;
    std::uint64_t n1 = 0;

    void add(int bit) { (bit ? n1 : n0) += 1; }
    std::uint64_t total() const noexcept { return n0 + n1; }

    friend bool operator==(const KtCounter&, const KtCounter&) = default;
};

/// (N_b + alpha) / (N0 + N1 + 2 alpha)
inline double kt_conditional(std::uint64_t n0, std::uint64_t n1, int bit, double alpha = kt_alpha) {
    const double nb = static_cast<double>(bit ? n1 : n0);
    return (nb + alpha) / (static_cast<double>(n0 + n1) + 2.0 * alpha);
}

inline double kt_conditional(const KtCounter& c, int bit, double alpha = kt_alpha) {
    return kt_conditional(c.n0, c.n1, bit, alpha);
}

}  // namespace vmm

#endif  // VMM_KT_HPP
