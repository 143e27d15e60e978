#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <span>

#include "hamiltonia/core.hpp"

namespace hamiltonia::trees {

using Rational = boost::multiprecision::cpp_rational;

/// Rooted tree with per-node harmonic labels, in canonical form.
///
/// Nodes are stored in depth-first preorder; node 0 is the first node, joined
/// to the (external) root r by the root line, so parent[0] == -1. The line
/// associated with node v is the one from parent(v) down to v. Children of
/// each node are kept as a sorted multiset of subtree encodings, and
/// `multiplicity` counts the distinct line-labelings collapsed into this
/// canonical form, i.e. order!/|Aut|. Summed over all canonical trees of
/// order k this reproduces Cayley's count k^{k-1} times the harmonic
/// labelings, which the tests use as an enumeration self-check.
///
/// The spans alias enumerator-internal buffers: a visited tree is valid only
/// for the duration of the visit callback.
struct LabeledTree {
    std::span<const int> parent;
    std::span<const int> label;  ///< index into `alphabet`, per node
    std::span<const HarmonicVector> alphabet;
    long long multiplicity = 1;

    int order() const { return static_cast<int>(parent.size()); }
    const HarmonicVector& nu(int v) const { return alphabet[static_cast<size_t>(label[v])]; }
};

struct EnumerationOptions {
    long long budget = 10'000'000;  ///< max canonical trees per call
};

/// Default options, honoring the HAMILTONIA_BUDGET environment variable.
EnumerationOptions default_enumeration_options();

/// Number of canonical labeled trees of order k over an alphabet of the given
/// size (computed by dynamic programming, without enumerating).
double canonical_tree_count(int k, int alphabet_size);

/// Visits every canonical labeled tree of order k exactly once, with correct
/// multiplicity. Throws OrderTooLarge if the canonical count exceeds the
/// budget.
void enumerate_trees(int k, const std::vector<HarmonicVector>& alphabet,
                     const std::function<void(const LabeledTree&)>& visit,
                     const EnumerationOptions& opts = default_enumeration_options());

/// Current on the line above node v: the sum of harmonics over the subtree
/// rooted at v. Entry 0 is the root-line current nu(theta).
std::vector<HarmonicVector> line_currents(const LabeledTree& t);

/// Value of a Kepler-equation tree: Val = (-i/k!) prod_lines(nu_v' nu_v)
/// prod_nodes c_{nu_v} with c_{+-1} = 1/2, the root-line factor taking
/// nu_v' = 1. The value is purely imaginary; the exact rational q with
/// Val = i q is returned. Trees with any |nu_v| != 1 evaluate to 0.
Rational kepler_tree_value(const LabeledTree& t);

/// Value of a torus-series tree: (-i(-1)^k/k!) prod_lines [nu_v'.nu_v /
/// (omega.nu(l))^2] prod_nodes f_{nu_v}, the root-line factor using the unit
/// vector u in place of nu_v'. Throws ZeroCurrentLine if any line current
/// vanishes (the caller is expected to have filtered those trees).
Complex lindstedt_tree_value(const LabeledTree& t, const FrequencyVector& omega, const FourierSeries& f,
                             std::span<const double> u);

/// Number of lines whose divisor sits in the dyadic scale-n window
/// 2^{-n} < C|omega.nu(l)| <= 2^{-n+1}. Requires omega to carry Diophantine
/// constants, node harmonics bounded by N, and the tree to satisfy the
/// non-repetition condition (no two lines on the same root path with equal
/// current); callers check the count against 4 N k 2^{-n/tau}.
int siegel_census(const LabeledTree& t, const FrequencyVector& omega, int n, int N);

/// True iff no two lines on the same path to the root carry equal currents.
bool non_repeating(const LabeledTree& t);

/// All harmonics with 0 < |nu| <= N in Z^dim.
std::vector<HarmonicVector> harmonic_ball(int dim, int N);

}  // namespace hamiltonia::trees
