#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chain.hpp"
#include "measure.hpp"
#include "parallel.hpp"
#include "schottky.hpp"
#include "stats.hpp"

namespace dimcons {

/// Vertices of the Cayley tree visited by a path, with ancestor tables for distances.
class PathTree {
public:
    using Node = std::uint32_t;

    explicit PathTree(int rank) : rank_(rank) {
        (void)Word(rank);
        add(0, 0, 0);
    }

    int rank() const noexcept { return rank_; }
    static constexpr Node root() noexcept { return 0; }
    std::size_t size() const noexcept { return parent_.size(); }
    std::size_t depth(Node v) const { return depth_[v]; }

    Node step(Node v, Letter l) {
        if (depth_[v] > 0 && letter_[v] == -l) return parent_[v];
        const std::size_t slot = slot_of(l);
        Node& child = children_[v * static_cast<std::size_t>(2 * rank_) + slot];
        if (child == kNone) {
            const Node created = static_cast<Node>(parent_.size());
            add(v, l, depth_[v] + 1);
            children_[v * static_cast<std::size_t>(2 * rank_) + slot] = created;
            return created;
        }
        return child;
    }

    Node walk(Node v, const Word& w) {
        require_same_group(w, Word(rank_));
        for (Letter l : w.letters()) v = step(v, l);
        return v;
    }

    Node ancestor(Node v, std::size_t d) const {
        std::size_t up = depth_[v] - d;
        for (std::size_t j = 0; up; ++j, up >>= 1)
            if (up & 1) v = up_[j][v];
        return v;
    }

    Node lca(Node a, Node b) const {
        if (depth_[a] < depth_[b]) std::swap(a, b);
        a = ancestor(a, depth_[b]);
        if (a == b) return a;
        for (std::size_t j = kLevels; j-- > 0;) {
            if (up_[j][a] != up_[j][b]) {
                a = up_[j][a];
                b = up_[j][b];
            }
        }
        return parent_[a];
    }

    long distance(Node a, Node b) const {
        return static_cast<long>(depth_[a] + depth_[b]) - 2 * static_cast<long>(depth_[lca(a, b)]);
    }

    long gromov(Node p, Node q, Node base) const {
        return (distance(base, p) + distance(base, q) - distance(p, q)) / 2;
    }

    Word word(Node v) const {
        std::vector<Letter> rev;
        for (; depth_[v] > 0; v = parent_[v]) rev.push_back(letter_[v]);
        return Word(rank_, std::vector<Letter>(rev.rbegin(), rev.rend()));
    }

private:
    static constexpr Node kNone = ~Node{0};
    static constexpr std::size_t kLevels = 22;

    std::size_t slot_of(Letter l) const {
        return l > 0 ? static_cast<std::size_t>(l - 1) : static_cast<std::size_t>(rank_ - l - 1);
    }

    void add(Node parent, Letter l, std::size_t depth) {
        const Node id = static_cast<Node>(parent_.size());
        parent_.push_back(id == 0 ? 0 : parent);
        letter_.push_back(l);
        depth_.push_back(depth);
        children_.insert(children_.end(), static_cast<std::size_t>(2 * rank_), kNone);
        for (std::size_t j = 0; j < kLevels; ++j)
            up_[j].push_back(j == 0 ? parent_.back() : up_[j - 1][up_[j - 1][id]]);
    }

    int rank_;
    std::vector<Node> parent_;
    std::vector<Letter> letter_;
    std::vector<std::size_t> depth_;
    std::vector<Node> children_;
    std::array<std::vector<Node>, kLevels> up_;
};

/// epsilon, C_0 and D of the construction; delta = 0 on trees.
struct PivotalConstants {
    double eps = 0.01;
    double C0 = 4.0;
    double D = 81.0;

    void validate() const {
        if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("pivotal constants: eps must be in (0, 1/2)");
        if (C0 < 0.0) throw ConfigError("pivotal constants: C_0 must be >= 0");
        if (D < 20.0 * C0 + 1.0) throw ConfigError("pivotal constants violate D >= 20 C_0 + 1");
    }
};

/// Input of the construction: s_i = a_i b_i for i = 1..n and interleaving words u_0..u_n.
struct PivotalInput {
    std::vector<Word> a;
    std::vector<Word> b;
    std::vector<Word> u;

    std::size_t size() const noexcept { return a.size(); }
    void validate() const {
        if (a.size() != b.size() || u.size() != a.size() + 1)
            throw ConfigError("pivotal input needs n letters a_i, b_i and n + 1 words u_i");
    }
};

struct PivotalAudit {
    std::size_t states = 0;       // nonempty P_n checked
    std::size_t violations = 0;
    std::optional<std::size_t> first_violation;  // time n
};

/// P_0..P_n with the marker points y_i^-, y_i, y_i^+ and y_{n+1}^- as tree nodes.
struct PivotalTrace {
    PathTree tree;
    std::vector<std::vector<std::size_t>> P;  // P[t] for t = 0..n
    std::vector<PathTree::Node> y_minus;      // index 1..n+1
    std::vector<PathTree::Node> y;            // index 1..n
    std::vector<PathTree::Node> y_plus;       // index 1..n
    std::vector<bool> local_geodesic;         // index 1..n
    PivotalAudit audit;

    const std::vector<std::size_t>& final_pivots() const { return P.back(); }
    Word endpoint() const { return tree.word(y_minus.back()); }
};

namespace detail {

/// Node-sequence version of is_chain, consequences included.
inline bool node_chain(const PathTree& t, const std::vector<PathTree::Node>& pts, double C, double D) {
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (static_cast<double>(t.distance(pts[i - 1], pts[i])) < D) return false;
        if (i + 1 < pts.size() && static_cast<double>(t.gromov(pts[i - 1], pts[i + 1], pts[i])) > C) return false;
    }
    if (D >= 2.0 * C + 1.0 && pts.size() >= 2) {
        double bound = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) bound += static_cast<double>(t.distance(pts[i - 1], pts[i])) - 2.0 * C;
        const auto total = static_cast<double>(t.distance(pts.front(), pts.back()));
        if (total < bound || total < static_cast<double>(pts.size() - 1))
            throw std::logic_error("chain consequence violated: d(x_0, x_n) too small");
        if (static_cast<double>(t.gromov(pts.front(), pts.back(), pts[1])) > C)
            throw std::logic_error("chain consequence violated: (x_0|x_n)_{x_1} > C");
    }
    return true;
}

} // namespace detail

/// The inductive pivotal times. With audit on, every nonempty P_t is checked to give the
/// (2C_0, D - 2C_0)-chain o, y_{k_1}, y_{k_2}^-, y_{k_2}, ..., y_{k_p}, y_{t+1}^-, and each
/// y_{k_i}^-, y_{k_i}, y_{t+1}^- (i >= 2) a (2C_0, D - 6C_0)-chain.
inline PivotalTrace pivotal_times(const PivotalInput& in, const PivotalConstants& k, bool audit = false) {
    in.validate();
    k.validate();
    const int rank = in.u.front().rank();
    PivotalTrace tr{PathTree(rank), {{}}, {0}, {0}, {0}, {false}, {}};
    auto& t = tr.tree;
    const std::size_t n = in.size();
    tr.y_minus.push_back(t.walk(PathTree::root(), in.u[0]));
    for (std::size_t i = 1; i <= n; ++i) {
        tr.y.push_back(t.walk(tr.y_minus[i], in.a[i - 1]));
        tr.y_plus.push_back(t.walk(tr.y[i], in.b[i - 1]));
        tr.y_minus.push_back(t.walk(tr.y_plus[i], in.u[i]));

        const auto& prev = tr.P.back();
        const PathTree::Node yk = prev.empty() ? PathTree::root() : tr.y[prev.back()];
        const bool lgc = static_cast<double>(t.gromov(yk, tr.y[i], tr.y_minus[i])) <= k.C0 &&
                         static_cast<double>(t.gromov(tr.y_minus[i], tr.y_plus[i], tr.y[i])) <= k.C0 &&
                         static_cast<double>(t.gromov(tr.y[i], tr.y_minus[i + 1], tr.y_plus[i])) <= k.C0;
        tr.local_geodesic.push_back(lgc);
        std::vector<std::size_t> next;
        if (lgc) {
            next = prev;
            next.push_back(i);
        } else {
            for (std::size_t j = prev.size(); j-- > 0;) {
                const std::size_t m = prev[j];
                const long ly = t.distance(tr.y[m], tr.y_plus[m]);
                const long lz = t.distance(tr.y[m], tr.y_minus[i + 1]);
                const long cp = t.gromov(tr.y_plus[m], tr.y_minus[i + 1], tr.y[m]);
                if (chain_shadow_contains_lengths(ly, lz, cp, k.C0)) {
                    next.assign(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(j + 1));
                    break;
                }
            }
        }
        const bool extends = lgc && next.size() == prev.size() + 1;
        const bool truncates = !lgc && next.size() <= prev.size() && std::equal(next.begin(), next.end(), prev.begin());
        if (!extends && !truncates) throw std::logic_error("pivotal set is neither an extension nor a truncation");
        tr.P.push_back(std::move(next));

        if (audit && !tr.P.back().empty()) {
            const auto& piv = tr.P.back();
            ++tr.audit.states;
            std::vector<PathTree::Node> pts{PathTree::root(), tr.y[piv.front()]};
            for (std::size_t q = 1; q < piv.size(); ++q) {
                pts.push_back(tr.y_minus[piv[q]]);
                pts.push_back(tr.y[piv[q]]);
            }
            pts.push_back(tr.y_minus[i + 1]);
            bool ok = detail::node_chain(t, pts, 2.0 * k.C0, k.D - 2.0 * k.C0);
            for (std::size_t q = 1; q < piv.size() && ok; ++q)
                ok = detail::node_chain(t, {tr.y_minus[piv[q]], tr.y[piv[q]], tr.y_minus[i + 1]}, 2.0 * k.C0, k.D - 6.0 * k.C0);
            if (!ok) {
                ++tr.audit.violations;
                if (!tr.audit.first_violation) tr.audit.first_violation = i;
            }
        }
    }
    return tr;
}

/// A sequence s = (a_i b_i) given by indices into a letter set S.
struct IndexedSequence {
    std::vector<std::size_t> a;
    std::vector<std::size_t> b;
};

inline PivotalInput materialize(const std::vector<Word>& S, const IndexedSequence& s, const std::vector<Word>& u) {
    PivotalInput in;
    for (auto i : s.a) in.a.push_back(S.at(i));
    for (auto i : s.b) in.b.push_back(S.at(i));
    in.u = u;
    return in;
}

struct ClassEnumeration {
    std::size_t members = 0;
    std::size_t distinct_endpoints = 0;
    std::size_t collisions = 0;    // members sharing y_{n+1}^- with an earlier member
    bool product_structure = false;  // E_n equals the product of the A_i
    bool symmetric = false;          // s is pivoted from a member whenever that member is pivoted from s
};

struct PivotedClass {
    std::vector<std::size_t> pivots;
    std::vector<std::vector<std::size_t>> A;  // A_i as indices into S, i = 1..n at position i-1
    bool size_bound = true;                   // #A_i >= (1 - 2 eps) #S at every pivotal i
    std::optional<ClassEnumeration> enumeration;
};

/// A_i(s) = {a : replacing a_i by a keeps the pivotal times}; frozen at non-pivotal i. With
/// enumerate set, walks all choices of the pivotal letters to list E_n(s) and count collisions
/// of y_{n+1}^-.
inline PivotedClass pivoted_class(const std::vector<Word>& S, const IndexedSequence& s, const std::vector<Word>& u,
                                  const PivotalConstants& k, bool enumerate = false,
                                  std::size_t budget = 1'000'000) {
    const std::size_t n = s.a.size();
    if (s.b.size() != n) throw ConfigError("pivoted class: a and b differ in length");
    if (enumerate && n > 8) throw ConfigError("full enumeration needs n <= 8");
    auto pivots_of = [&](const IndexedSequence& seq) { return pivotal_times(materialize(S, seq, u), k).final_pivots(); };

    PivotedClass pc;
    pc.pivots = pivots_of(s);
    pc.A.resize(n);
    std::vector<bool> pivotal(n, false);
    for (auto i : pc.pivots) pivotal[i - 1] = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!pivotal[i]) {
            pc.A[i] = {s.a[i]};
            continue;
        }
        IndexedSequence alt = s;
        for (std::size_t c = 0; c < S.size(); ++c) {
            alt.a[i] = c;
            if (c == s.a[i] || pivots_of(alt) == pc.pivots) pc.A[i].push_back(c);
        }
        if (static_cast<double>(pc.A[i].size()) < (1.0 - 2.0 * k.eps) * static_cast<double>(S.size())) pc.size_bound = false;
    }
    if (!enumerate) return pc;

    double total = 1.0;
    for (std::size_t q = 0; q < pc.pivots.size(); ++q) total *= static_cast<double>(S.size());
    if (total > static_cast<double>(budget)) throw Error("pivoted class enumeration exceeds its budget");

    ClassEnumeration en;
    std::map<Word, std::size_t> endpoints;
    std::vector<IndexedSequence> members;
    std::vector<std::size_t> digits(pc.pivots.size(), 0);
    for (;;) {
        IndexedSequence cand = s;
        for (std::size_t q = 0; q < digits.size(); ++q) cand.a[pc.pivots[q] - 1] = digits[q];
        const auto trace = pivotal_times(materialize(S, cand, u), k);
        if (trace.final_pivots() == pc.pivots) {
            ++en.members;
            if (++endpoints[trace.endpoint()] > 1) ++en.collisions;
            if (members.size() < 4) members.push_back(cand);
        }
        std::size_t q = 0;
        while (q < digits.size() && ++digits[q] == S.size()) digits[q++] = 0;
        if (q == digits.size()) break;
    }
    en.distinct_endpoints = endpoints.size();
    double product = 1.0;
    for (auto i : pc.pivots) product *= static_cast<double>(pc.A[i - 1].size());
    en.product_structure = static_cast<double>(en.members) == product;
    en.symmetric = true;
    for (const auto& m : members)
        if (pivots_of(m) != pc.pivots) en.symmetric = false;
    pc.enumeration = en;
    return pc;
}

/// pi = alpha lambda x lambda* + (1 - alpha) pi_0.
struct SchottkyDecomposition {
    double alpha = 1.0;
    FactorMeasure lambda;
    FactorMeasure lambda_star;
    MeasureSpec pi0;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
        if (pi0.rank1() != lambda.rank() || pi0.rank2() != lambda_star.rank())
            throw SpecMismatch("pi_0 does not live on the product of the factor groups");
    }

    MeasureSpec measure() const {
        validate();
        std::map<ProductElement, double> w;
        for (const auto& x : lambda.atoms())
            for (const auto& y : lambda_star.atoms()) w[{x.value, y.value}] += alpha * x.weight * y.weight;
        if (alpha < 1.0)
            for (const auto& a : pi0.atoms()) w[a.value] += (1.0 - alpha) * a.weight;
        std::vector<MeasureSpec::Atom> atoms;
        for (auto& [g, p] : w) atoms.push_back({g, p});
        return MeasureSpec::table(lambda.rank(), lambda_star.rank(), std::move(atoms));
    }

    /// rho mu x mu + (1 - rho) mu_diag.
    static SchottkyDecomposition noise_mixture(double rho, const FactorMeasure& mu) {
        return {rho, mu, mu, MeasureSpec::noise_mixture(0.0, mu)};
    }
};

/// Block length N = 2M, beta with lambda^{*N} = beta lambda_S^{*2} + (1 - beta) lambda_0, and
/// the flag probability alpha^N beta.
struct CouplingPlan {
    SchottkySearch schottky;
    std::size_t N = 0;
    double beta = 0.0;
    double log_flag_probability = 0.0;
    std::map<Word, std::vector<std::pair<std::size_t, std::size_t>>> splits;  // g -> (a, b) with a b = g
    std::map<Word, double> lambda_N;                                         // lambda^{*N} on S S
    double flag_probability() const { return std::exp(log_flag_probability); }
};

inline CouplingPlan plan_coupling(const SchottkyDecomposition& d, const PivotalConstants& k, std::size_t max_m = 8,
                                  std::size_t support_budget = 2'000'000) {
    d.validate();
    k.validate();
    CouplingPlan plan;
    plan.schottky = schottky_search(d.lambda, k.eps, k.C0, k.D, max_m, support_budget);
    plan.N = 2 * plan.schottky.M;
    const auto& S = plan.schottky.certificate.S;
    for (std::size_t i = 0; i < S.size(); ++i)
        for (std::size_t j = 0; j < S.size(); ++j) plan.splits[S[i] * S[j]].push_back({i, j});

    std::map<Word, double> conv{{Word(d.lambda.rank()), 1.0}};
    for (std::size_t step = 0; step < plan.N; ++step) {
        std::map<Word, double> next;
        for (const auto& [w, p] : conv)
            for (const auto& a : d.lambda.atoms()) next[w * a.value] += p * a.weight;
        if (next.size() > support_budget) throw Unsupported("lambda^{*N} support exceeds the budget");
        conv = std::move(next);
    }
    const double pairs = static_cast<double>(S.size() * S.size());
    double beta = 1.0;
    for (const auto& [g, list] : plan.splits) {
        const auto it = conv.find(g);
        const double mass = it == conv.end() ? 0.0 : it->second;
        plan.lambda_N[g] = mass;
        beta = std::min(beta, mass / (static_cast<double>(list.size()) / pairs));
    }
    plan.beta = beta;
    plan.log_flag_probability = static_cast<double>(plan.N) * std::log(d.alpha) + std::log(beta);
    return plan;
}

/// One realization of the coupling up to time n: the flagged blocks give s_j = a_j b_j, the
/// rest of the first coordinate goes into u_0, ..., u_{tau-1}, u(n).
struct CoupledSample {
    IndexedSequence s;
    std::vector<Word> u;
    std::size_t tau = 0;
};

inline CoupledSample sample_coupling(const SchottkyDecomposition& d, const CouplingPlan& plan, std::size_t n, Rng& rng) {
    const int rank = d.lambda.rank();
    const double pairs = static_cast<double>(plan.schottky.certificate.S.size() * plan.schottky.certificate.S.size());
    CoupledSample out;
    out.u.emplace_back(rank);
    const std::size_t blocks = n / plan.N;
    for (std::size_t blk = 0; blk <= blocks; ++blk) {
        const std::size_t len = blk < blocks ? plan.N : n % plan.N;
        if (len == 0) continue;
        std::vector<Word> steps;
        bool all_product = true;
        for (std::size_t i = 0; i < len; ++i) {
            if (rng.bernoulli(d.alpha)) {
                steps.push_back(d.lambda.sample(rng));
                (void)d.lambda_star.sample(rng);
            } else {
                all_product = false;
                steps.push_back(d.pi0.sample(rng).first);
            }
        }
        Word g(rank);
        for (const auto& w : steps) g *= w;
        bool flagged = false;
        if (all_product && len == plan.N) {
            const auto it = plan.splits.find(g);
            if (it != plan.splits.end()) {
                const double ratio = plan.beta * (static_cast<double>(it->second.size()) / pairs) / plan.lambda_N.at(g);
                if (rng.uniform() < ratio) {
                    const auto& [ai, bi] = it->second[rng.index(it->second.size())];
                    out.s.a.push_back(ai);
                    out.s.b.push_back(bi);
                    out.u.emplace_back(rank);
                    ++out.tau;
                    flagged = true;
                }
            }
        }
        if (!flagged) out.u.back() *= g;
    }
    return out;
}

struct PivotalTimeStats {
    std::size_t n = 0;
    std::vector<std::size_t> counts;  // #P_{tau(n)} per trial
    double mean_tau = 0.0;
    double mean_ratio = 0.0;          // #P / n
    double sd_ratio = 0.0;
    double tail_frequency = 0.0;      // share of trials with #P <= kappa_hat n
};

struct PivotalStatsParams {
    std::vector<std::size_t> times{200, 400, 800};
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    double kappa_quantile = 0.1;  // kappa_hat is this quantile of #P/n at the first time
    std::size_t max_m = 8;
};

struct PivotalReport {
    CouplingPlan plan;
    std::vector<PivotalTimeStats> per_time;
    double kappa_hat = 0.0;
    bool tail_decreasing = false;
    double gap_bound = 0.0;  // kappa_hat log((1 - 2 eps) #S)
};

/// Empirical #P_{tau(n)} under the coupling, kappa_hat, and the implied lower bound on h(pi) - h(mu*).
inline PivotalReport pivotal_stats_and_entropy_gap(const SchottkyDecomposition& d, const PivotalConstants& k,
                                                   const PivotalStatsParams& p = {}) {
    if (p.times.empty() || p.trials == 0) throw ConfigError("pivotal statistics need times and trials");
    PivotalReport r;
    r.plan = plan_coupling(d, k, p.max_m);
    const auto& S = r.plan.schottky.certificate.S;
    for (std::size_t ti = 0; ti < p.times.size(); ++ti) {
        const std::size_t n = p.times[ti];
        const std::uint64_t seed = p.seed ^ mix64(0x5EED0000ull + n);
        const auto runs = parallel_map<std::pair<std::size_t, std::size_t>>(p.trials, [&](std::size_t t) {
            Rng rng = Rng::for_trial(seed, t);
            const auto sample = sample_coupling(d, r.plan, n, rng);
            const auto trace = pivotal_times(materialize(S, sample.s, sample.u), k);
            return std::pair{trace.final_pivots().size(), sample.tau};
        });
        PivotalTimeStats st;
        st.n = n;
        MeanAccumulator ratio, tau;
        for (const auto& [c, tv] : runs) {
            st.counts.push_back(c);
            ratio.add(static_cast<double>(c) / static_cast<double>(n));
            tau.add(static_cast<double>(tv));
        }
        st.mean_ratio = ratio.mean();
        st.sd_ratio = std::sqrt(ratio.variance());
        st.mean_tau = tau.mean();
        r.per_time.push_back(std::move(st));
    }
    auto first = r.per_time.front().counts;
    std::sort(first.begin(), first.end());
    const auto qi = static_cast<std::size_t>(std::floor(p.kappa_quantile * static_cast<double>(first.size() - 1)));
    r.kappa_hat = static_cast<double>(first[qi]) / static_cast<double>(r.per_time.front().n);
    for (auto& st : r.per_time) {
        std::size_t low = 0;
        for (auto c : st.counts)
            if (static_cast<double>(c) <= r.kappa_hat * static_cast<double>(st.n)) ++low;
        st.tail_frequency = static_cast<double>(low) / static_cast<double>(st.counts.size());
    }
    r.tail_decreasing = r.kappa_hat > 0.0 && r.per_time.size() >= 2 &&
                        r.per_time.back().tail_frequency < r.per_time.front().tail_frequency;
    for (std::size_t i = 1; i < r.per_time.size(); ++i)
        if (r.per_time[i].tail_frequency > r.per_time[i - 1].tail_frequency) r.tail_decreasing = false;
    r.gap_bound = r.kappa_hat * std::log((1.0 - 2.0 * k.eps) * static_cast<double>(S.size()));
    return r;
}

} // namespace dimcons
