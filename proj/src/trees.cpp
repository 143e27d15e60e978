#include "hamiltonia/trees.hpp"

#include <cstdlib>
#include <map>

namespace hamiltonia::trees {

EnumerationOptions default_enumeration_options() {
    EnumerationOptions opts;
    if (const char* env = std::getenv("HAMILTONIA_BUDGET")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end != env && v > 0) opts.budget = v;
    }
    return opts;
}

namespace {

double multiset_count(double d, int s) {
    // C(d + s - 1, s), evaluated in floating point (counts can be huge)
    double r = 1.0;
    for (int i = 0; i < s; ++i) r *= (d + i) / (i + 1);
    return r;
}

// canonical child-multiset count for total order `total` with parts <= maxpart
double partition_count(int total, int maxpart, const std::vector<double>& tree_count) {
    if (total == 0) return 1.0;
    if (maxpart == 0) return 0.0;
    double sum = 0.0;
    for (int n = std::min(total, maxpart); n >= 1; --n)
        for (int s = 1; n * s <= total; ++s)
            sum += multiset_count(tree_count[static_cast<size_t>(n)], s) *
                   partition_count(total - n * s, n - 1, tree_count);
    return sum;
}

long long factorial(int k) {
    long long r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

/// Streaming canonical enumeration.
///
/// Trees of a given order are generated in a fixed deterministic sequence;
/// the sequence position doubles as a total order on canonical subtrees, so
/// sibling groups of equal order are constrained to non-decreasing positions
/// (one representative per multiset) and runs of equal positions accumulate
/// the automorphism factor prod(run!).
class Enumerator {
public:
    Enumerator(int k, std::span<const HarmonicVector> alphabet, long long budget,
               const std::function<void(const LabeledTree&)>& visit)
        : k_(k), alphabet_(alphabet), budget_(budget), visit_(visit) {
        parent_.reserve(static_cast<size_t>(k));
        label_.reserve(static_cast<size_t>(k));
        kfact_ = factorial(k);
    }

    void run() {
        gen_tree(k_, -1, [this](long long /*pos*/, long long aut) {
            if (++visited_ > budget_)
                throw OrderTooLarge("enumerate_trees: budget exceeded during enumeration");
            LabeledTree view{std::span<const int>(parent_), std::span<const int>(label_), alphabet_,
                             kfact_ / aut};
            visit_(view);
        });
    }

private:
    using Cont = std::function<void(long long pos, long long aut)>;
    using ChildCont = std::function<void(long long aut)>;

    // All canonical trees of order j attached under `parent`; cont receives
    // the tree's sequence position among order-j trees and its |Aut|.
    void gen_tree(int j, int parent, const Cont& cont) {
        const int v = static_cast<int>(parent_.size());
        parent_.push_back(parent);
        label_.push_back(0);
        long long pos = 0;
        for (int a = 0; a < static_cast<int>(alphabet_.size()); ++a) {
            label_[static_cast<size_t>(v)] = a;
            if (j == 1) {
                cont(pos++, 1);
            } else {
                gen_children(v, j - 1, j - 1, [&](long long aut) { cont(pos++, aut); });
            }
        }
        parent_.pop_back();
        label_.pop_back();
    }

    // Child multisets of total order `total` under node v, part sizes <= maxpart
    // in strictly decreasing group order.
    void gen_children(int v, int total, int maxpart, const ChildCont& cont) {
        if (total == 0) {
            cont(1);
            return;
        }
        if (maxpart == 0) return;
        for (int n = std::min(total, maxpart); n >= 1; --n) {
            for (int s = 1; n * s <= total; ++s) {
                gen_group(v, n, s, 0, -1, 0, 1, [&, n, s](long long aut_group) {
                    gen_children(v, total - n * s, n - 1,
                                 [&](long long aut_rest) { cont(aut_group * aut_rest); });
                });
            }
        }
    }

    // s subtrees of order n under v with non-decreasing sequence positions.
    void gen_group(int v, int n, int s, long long min_pos, long long prev_pos, long long run,
                   long long aut_acc, const ChildCont& cont) {
        if (s == 0) {
            cont(aut_acc);
            return;
        }
        gen_tree(n, v, [&](long long pos, long long aut_sub) {
            if (pos < min_pos) return;
            const long long new_run = (pos == prev_pos) ? run + 1 : 1;
            gen_group(v, n, s - 1, pos, pos, new_run, aut_acc * aut_sub * new_run, cont);
        });
    }

    int k_;
    std::span<const HarmonicVector> alphabet_;
    long long budget_;
    const std::function<void(const LabeledTree&)>& visit_;
    std::vector<int> parent_;
    std::vector<int> label_;
    long long visited_ = 0;
    long long kfact_ = 1;
};

}  // namespace

double canonical_tree_count(int k, int alphabet_size) {
    if (k < 1) throw PreconditionViolated("canonical_tree_count: order must be >= 1");
    std::vector<double> count(static_cast<size_t>(k) + 1, 0.0);
    for (int j = 1; j <= k; ++j)
        count[static_cast<size_t>(j)] =
            static_cast<double>(alphabet_size) * partition_count(j - 1, j - 1, count);
    return count[static_cast<size_t>(k)];
}

void enumerate_trees(int k, const std::vector<HarmonicVector>& alphabet,
                     const std::function<void(const LabeledTree&)>& visit, const EnumerationOptions& opts) {
    if (k < 1) throw PreconditionViolated("enumerate_trees: order must be >= 1");
    if (alphabet.empty()) throw PreconditionViolated("enumerate_trees: alphabet must be nonempty");
    const int dim = alphabet.front().dim();
    for (const auto& nu : alphabet)
        if (nu.dim() != dim) throw PreconditionViolated("enumerate_trees: mixed alphabet dimensions");
    if (canonical_tree_count(k, static_cast<int>(alphabet.size())) > static_cast<double>(opts.budget))
        throw OrderTooLarge("enumerate_trees: canonical tree count exceeds budget");
    Enumerator e(k, std::span<const HarmonicVector>(alphabet), opts.budget, visit);
    e.run();
}

std::vector<HarmonicVector> line_currents(const LabeledTree& t) {
    const int k = t.order();
    const int dim = t.alphabet.front().dim();
    std::vector<std::vector<int>> acc(static_cast<size_t>(k), std::vector<int>(static_cast<size_t>(dim)));
    for (int v = 0; v < k; ++v) {
        const auto& nu = t.nu(v);
        for (int i = 0; i < dim; ++i) acc[static_cast<size_t>(v)][static_cast<size_t>(i)] = nu[i];
    }
    for (int v = k - 1; v >= 1; --v) {
        auto& up = acc[static_cast<size_t>(t.parent[static_cast<size_t>(v)])];
        const auto& me = acc[static_cast<size_t>(v)];
        for (int i = 0; i < dim; ++i) up[static_cast<size_t>(i)] += me[static_cast<size_t>(i)];
    }
    std::vector<HarmonicVector> out;
    out.reserve(static_cast<size_t>(k));
    for (auto& a : acc) out.emplace_back(std::move(a));
    return out;
}

Rational kepler_tree_value(const LabeledTree& t) {
    const int k = t.order();
    int sign = 1;
    for (int v = 0; v < k; ++v) {
        const auto& nu = t.nu(v);
        if (nu.dim() != 1 || std::abs(nu[0]) != 1) return Rational(0);
        const int up = (v == 0) ? 1 : t.nu(t.parent[static_cast<size_t>(v)])[0];
        sign *= up * nu[0];
    }
    // Val = (-i/k!) * sign * (1/2)^k  =>  q with Val = i q
    Rational q(-sign, 1);
    q /= factorial(k);
    q /= Rational(boost::multiprecision::cpp_int(1) << k);
    return q;
}

Complex lindstedt_tree_value(const LabeledTree& t, const FrequencyVector& omega, const FourierSeries& f,
                             std::span<const double> u) {
    const int k = t.order();
    const auto currents = line_currents(t);
    Complex val(0.0, (k % 2 == 0) ? -1.0 : 1.0);  // -i (-1)^k
    val /= static_cast<double>(factorial(k));
    for (int v = 0; v < k; ++v) {
        const auto& cur = currents[static_cast<size_t>(v)];
        if (cur.is_zero()) throw ZeroCurrentLine("lindstedt_tree_value: a line carries zero current");
        const double d = omega.small_divisor(cur);
        const auto& nuv = t.nu(v);
        double dot;
        if (v == 0) {
            dot = nuv.dot(u);
        } else {
            dot = static_cast<double>(nuv.dot(t.nu(t.parent[static_cast<size_t>(v)])));
        }
        val *= dot / (d * d);
        val *= f.at(nuv);
        if (val == Complex(0.0, 0.0)) return val;
    }
    return val;
}

bool non_repeating(const LabeledTree& t) {
    const auto currents = line_currents(t);
    const int k = t.order();
    for (int v = 0; v < k; ++v) {
        for (int a = t.parent[static_cast<size_t>(v)]; a >= 0; a = t.parent[static_cast<size_t>(a)]) {
            if (currents[static_cast<size_t>(v)] == currents[static_cast<size_t>(a)]) return false;
        }
    }
    return true;
}

int siegel_census(const LabeledTree& t, const FrequencyVector& omega, int n, int N) {
    if (n < 1) throw PreconditionViolated("siegel_census: scale index n must be >= 1");
    if (!omega.diophantine())
        throw PreconditionViolated("siegel_census: omega must carry Diophantine constants");
    for (int v = 0; v < t.order(); ++v)
        if (t.nu(v).norm1() > N)
            throw PreconditionViolated("siegel_census: node harmonic exceeds the bound N");
    if (!non_repeating(t))
        throw PreconditionViolated("siegel_census: tree violates the non-repetition condition");
    const double C = omega.diophantine()->C;
    const double lo = std::pow(2.0, -n);
    const double hi = 2.0 * lo;
    int count = 0;
    for (const auto& cur : line_currents(t)) {
        if (cur.is_zero()) continue;
        const double scaled = C * std::abs(omega.small_divisor(cur));
        if (scaled > lo && scaled <= hi) ++count;
    }
    return count;
}

std::vector<HarmonicVector> harmonic_ball(int dim, int N) {
    std::vector<HarmonicVector> out;
    std::vector<int> cur(static_cast<size_t>(dim), 0);
    const std::function<void(int, int)> rec = [&](int pos, int rem) {
        if (pos == dim) {
            HarmonicVector nu(cur);
            if (!nu.is_zero()) out.push_back(std::move(nu));
            return;
        }
        for (int v = -rem; v <= rem; ++v) {
            cur[static_cast<size_t>(pos)] = v;
            rec(pos + 1, rem - std::abs(v));
        }
    };
    rec(0, N);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace hamiltonia::trees
