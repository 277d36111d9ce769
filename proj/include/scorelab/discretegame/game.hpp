#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "scorelab/core/errors.hpp"
#include "scorelab/core/format.hpp"
#include "scorelab/core/parallel.hpp"
#include "scorelab/core/rng.hpp"

namespace scorelab {

/// Finite set of elements and an ordered list of yes/no questions, each
/// given as its truth table over the elements.
class GameUniverse {
public:
    GameUniverse(std::vector<std::string> elements, std::vector<std::vector<bool>> questions)
        : elements_(std::move(elements)), questions_(std::move(questions)) {
        if (elements_.empty()) throw DomainError("GameUniverse: need at least one element");
        if (std::set<std::string>(elements_.begin(), elements_.end()).size() != elements_.size())
            throw DomainError("GameUniverse: element identifiers must be distinct");
        for (std::size_t q = 0; q < questions_.size(); ++q)
            if (questions_[q].size() != elements_.size())
                throw DomainError("GameUniverse: question " + std::to_string(q) + " does not cover every element");
        std::set<std::vector<bool>> signatures;
        for (std::size_t e = 0; e < elements_.size(); ++e) {
            std::vector<bool> sig;
            for (const auto& q : questions_) sig.push_back(q[e]);
            if (!signatures.insert(sig).second)
                throw DomainError("GameUniverse: questions do not separate element '" + elements_[e] + "'");
        }
    }

    std::size_t size() const { return elements_.size(); }
    std::size_t n_questions() const { return questions_.size(); }
    const std::vector<std::string>& elements() const { return elements_; }
    bool answer(std::size_t question, std::size_t element) const { return questions_[question][element]; }

    std::size_t index_of(const std::string& element) const {
        const auto it = std::find(elements_.begin(), elements_.end(), element);
        if (it == elements_.end()) throw DomainError("GameUniverse: unknown element '" + element + "'");
        return static_cast<std::size_t>(it - elements_.begin());
    }

private:
    std::vector<std::string> elements_;
    std::vector<std::vector<bool>> questions_;
};

/// 2^n_bits elements; question j asks for bit j (most significant first).
inline GameUniverse balanced_universe(unsigned n_bits) {
    if (n_bits > 20) throw DomainError("balanced_universe: at most 20 bits");
    const std::size_t n = std::size_t{1} << n_bits;
    std::vector<std::string> elements;
    for (std::size_t i = 0; i < n; ++i) elements.push_back("e" + std::to_string(i));
    std::vector<std::vector<bool>> questions(n_bits, std::vector<bool>(n));
    for (unsigned j = 0; j < n_bits; ++j)
        for (std::size_t i = 0; i < n; ++i) questions[j][i] = ((i >> (n_bits - 1 - j)) & 1u) != 0;
    return GameUniverse(std::move(elements), std::move(questions));
}

/// Answers so far and the number of elements consistent with them.
struct GameState {
    std::string answers;  // '0' / '1' per answered question
    std::size_t consistent_count = 0;
    std::size_t step = 0;
};

/// One answered question. delta_h_bits is the entropy the question removes
/// on average, log2 N - (N0/N) log2 N0 - (N1/N) log2 N1 with N = N0 + N1 the
/// set size before it; realized_bits = log2(N / N_after).
struct GameStep {
    std::size_t step = 0;
    std::size_t n_before = 0;
    std::size_t n_after = 0;
    std::size_t n_zero = 0;
    std::size_t n_one = 0;
    char answer = '0';
    double delta_h_bits = 0.0;
    double realized_bits = 0.0;
};

struct GameRecord {
    std::vector<GameState> states;  // states[0] is the empty history
    std::vector<GameStep> steps;
    std::optional<std::size_t> element;  // set for the fixed-element policy
};

enum class OraclePolicy {
    fixed_element,  // answers truthfully about a hidden element
    lazy_random,    // draws each answer with probability N0/N, N1/N
    biased,         // lazy oracle with P(0) shifted by a constant
};

inline double split_information_bits(std::size_t n0, std::size_t n1) {
    const double n = static_cast<double>(n0 + n1);
    if (n == 0.0) return 0.0;
    const auto term = [&](std::size_t k) {
        const double p = static_cast<double>(k) / n;
        return k == 0 ? 0.0 : p * std::log2(static_cast<double>(k));
    };
    return std::log2(n) - term(n0) - term(n1);
}

/// Masking map of the forward view: keeps the first j answers.
inline std::string mask(const std::string& answers, std::size_t j) {
    std::string out = answers;
    for (std::size_t i = j; i < out.size(); ++i) out[i] = '*';
    return out;
}

namespace detail {

inline std::pair<std::size_t, std::size_t> split_counts(const GameUniverse& u, const std::vector<std::size_t>& alive,
                                                        std::size_t question) {
    std::size_t n1 = 0;
    for (std::size_t e : alive) n1 += u.answer(question, e) ? 1 : 0;
    return {alive.size() - n1, n1};
}

inline double answer_zero_probability(OraclePolicy policy, std::size_t n0, std::size_t n1, double bias) {
    const double p = static_cast<double>(n0) / static_cast<double>(n0 + n1);
    if (policy != OraclePolicy::biased || n0 == 0 || n1 == 0) return p;
    return std::clamp(p + bias, 0.0, 1.0);
}

}  // namespace detail

inline constexpr double kDefaultOracleBias = 0.2;

namespace detail {

inline GameRecord play_with(const GameUniverse& universe, std::optional<std::size_t> element, OraclePolicy policy,
                            Engine& eng, double bias) {
    if (policy == OraclePolicy::fixed_element) {
        if (!element) throw DomainError("play_oracle: fixed-element policy needs an element");
        if (*element >= universe.size()) throw DomainError("play_oracle: element index out of range");
    }
    std::uniform_real_distribution<double> unit;
    std::vector<std::size_t> alive(universe.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

    GameRecord rec;
    if (policy == OraclePolicy::fixed_element) rec.element = element;
    rec.states.push_back({"", alive.size(), 0});
    for (std::size_t q = 0; q < universe.n_questions(); ++q) {
        const auto [n0, n1] = split_counts(universe, alive, q);
        bool bit = false;
        if (policy == OraclePolicy::fixed_element) {
            bit = universe.answer(q, *element);
        } else {
            bit = !(unit(eng) < answer_zero_probability(policy, n0, n1, bias));
        }
        std::vector<std::size_t> next;
        for (std::size_t e : alive)
            if (universe.answer(q, e) == bit) next.push_back(e);
        if (next.empty())
            throw DomainError("play_oracle: no element is consistent after question " + std::to_string(q));
        GameStep s;
        s.step = q + 1;
        s.n_before = alive.size();
        s.n_after = next.size();
        s.n_zero = n0;
        s.n_one = n1;
        s.answer = bit ? '1' : '0';
        s.delta_h_bits = split_information_bits(n0, n1);
        s.realized_bits = std::log2(static_cast<double>(s.n_before) / static_cast<double>(s.n_after));
        rec.steps.push_back(s);
        alive = std::move(next);
        rec.states.push_back({rec.states.back().answers + s.answer, alive.size(), q + 1});
    }
    return rec;
}

}  // namespace detail

/// Plays every question once. The fixed-element policy needs `element`.
inline GameRecord play_oracle(const GameUniverse& universe, std::optional<std::size_t> element, OraclePolicy policy,
                              Seed seed, double bias = kDefaultOracleBias) {
    Engine eng = make_engine(seed);
    return detail::play_with(universe, element, policy, eng, bias);
}

using AnswerDistribution = std::map<std::string, double>;

/// Exact law of the full answer string, by enumeration of the answer tree.
inline AnswerDistribution exact_answer_distribution(const GameUniverse& universe, OraclePolicy policy,
                                                    double bias = kDefaultOracleBias) {
    if (universe.size() > (std::size_t{1} << 10)) throw DomainError("exact_answer_distribution: at most 2^10 elements");
    AnswerDistribution out;
    if (policy == OraclePolicy::fixed_element) {
        for (std::size_t e = 0; e < universe.size(); ++e) {
            std::string s;
            for (std::size_t q = 0; q < universe.n_questions(); ++q) s += universe.answer(q, e) ? '1' : '0';
            out[s] += 1.0 / static_cast<double>(universe.size());
        }
        return out;
    }
    struct Node {
        std::vector<std::size_t> alive;
        std::string prefix;
        double p;
    };
    std::vector<Node> frontier{{{}, "", 1.0}};
    for (std::size_t i = 0; i < universe.size(); ++i) frontier[0].alive.push_back(i);
    for (std::size_t q = 0; q < universe.n_questions(); ++q) {
        std::vector<Node> next;
        for (const auto& n : frontier) {
            const auto [n0, n1] = detail::split_counts(universe, n.alive, q);
            const double p0 = detail::answer_zero_probability(policy, n0, n1, bias);
            for (bool bit : {false, true}) {
                const double pb = bit ? 1.0 - p0 : p0;
                if (pb == 0.0) continue;
                Node c{{}, n.prefix + (bit ? '1' : '0'), n.p * pb};
                for (std::size_t e : n.alive)
                    if (universe.answer(q, e) == bit) c.alive.push_back(e);
                next.push_back(std::move(c));
            }
        }
        frontier = std::move(next);
    }
    for (const auto& n : frontier) out[n.prefix] += n.p;
    return out;
}

inline double total_variation(const AnswerDistribution& a, const AnswerDistribution& b) {
    double tv = 0.0;
    for (const auto& [k, p] : a) {
        const auto it = b.find(k);
        tv += std::abs(p - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [k, p] : b)
        if (!a.count(k)) tv += p;
    return 0.5 * tv;
}

/// Empirical answer-string law over n_games games; the fixed-element policy
/// draws the hidden element uniformly per game.
inline AnswerDistribution empirical_answer_distribution(const GameUniverse& universe, OraclePolicy policy,
                                                        std::size_t n_games, Seed seed,
                                                        double bias = kDefaultOracleBias) {
    const auto blocks = parallel_map(block_count(n_games), [&](std::size_t b) {
        Engine eng = make_engine(substream(seed, "twentyq", (static_cast<std::uint64_t>(policy) << 32) + b));
        std::uniform_int_distribution<std::size_t> pick(0, universe.size() - 1);
        std::vector<std::string> strings;
        const std::size_t end = std::min(n_games, (b + 1) * kSampleBlock);
        for (std::size_t g = b * kSampleBlock; g < end; ++g) {
            std::optional<std::size_t> element;
            if (policy == OraclePolicy::fixed_element) element = pick(eng);
            strings.push_back(detail::play_with(universe, element, policy, eng, bias).states.back().answers);
        }
        return strings;
    });
    std::map<std::string, std::size_t> counts;
    for (const auto& block : blocks)
        for (const auto& s : block) ++counts[s];
    AnswerDistribution out;
    for (const auto& [s, c] : counts) out[s] = static_cast<double>(c) / static_cast<double>(n_games);
    return out;
}

/// Total-variation distance between the empirical answer-string laws of the
/// fixed-element oracle and `other` (the lazy oracle by default).
inline double verify_policy_equivalence(const GameUniverse& universe, std::size_t n_games, Seed seed,
                                        OraclePolicy other = OraclePolicy::lazy_random,
                                        double bias = kDefaultOracleBias) {
    if (n_games < 1) throw DomainError("verify_policy_equivalence: n_games must be >= 1");
    return total_variation(empirical_answer_distribution(universe, OraclePolicy::fixed_element, n_games, seed),
                           empirical_answer_distribution(universe, other, n_games, seed, bias));
}

/// Sum over questions of the expected delta_h_bits under the lazy oracle.
inline double expected_information_bits(const GameUniverse& universe) {
    double total = 0.0;
    for (const auto& [answers, p] : exact_answer_distribution(universe, OraclePolicy::lazy_random)) {
        std::vector<std::size_t> alive(universe.size());
        for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
        for (std::size_t q = 0; q < universe.n_questions(); ++q) {
            const auto [n0, n1] = detail::split_counts(universe, alive, q);
            total += p * split_information_bits(n0, n1);
            std::vector<std::size_t> next;
            for (std::size_t e : alive)
                if (universe.answer(q, e) == (answers[q] == '1')) next.push_back(e);
            alive = std::move(next);
        }
    }
    return total;
}

inline void write_game_csv(std::ostream& out, const GameRecord& rec) {
    out << "step,N_j,answer,delta_H_bits\n";
    for (const auto& s : rec.steps)
        out << s.step << ',' << s.n_after << ',' << s.answer << ',' << format_double(s.delta_h_bits) << '\n';
}

}  // namespace scorelab
