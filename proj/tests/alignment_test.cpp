#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "confmon/alignment.hpp"
#include "confmon/playout.hpp"
#include "support/fixtures.hpp"

using namespace confmon;
using namespace confmon::align;
using testing_support::fn1;
using testing_support::oracle_cost;
using testing_support::words;

namespace {

std::vector<std::string> model_ids(const petri::PetriNet& net, const Alignment& a) {
    std::vector<std::string> out;
    for (const auto& m : a.moves)
        if (m.kind == MoveKind::model) out.push_back(net.transition(*m.transition).id);
    return out;
}

// Checks that `a` is a genuine alignment of `trace` against `net`.
void expect_valid(const petri::PetriNet& net, const std::vector<std::string>& trace, const Alignment& a,
                  const CostScheme& costs = {}) {
    EXPECT_EQ(log_projection(a), trace);
    auto m = net.initial_marking();
    double cost = 0;
    for (const auto& mv : a.moves) {
        cost += costs.of(mv.kind);
        if (!mv.has_model_part()) continue;
        ASSERT_TRUE(petri::is_enabled(net, m, *mv.transition));
        const auto& tr = net.transition(*mv.transition);
        EXPECT_EQ(mv.kind == MoveKind::silent, tr.silent());
        if (mv.kind == MoveKind::synchronous) { EXPECT_EQ(*tr.label, mv.activity); }
        m = petri::fire(net, m, *mv.transition);
    }
    EXPECT_EQ(m, net.final_marking());
    EXPECT_NEAR(cost, a.cost, 1e-9);
}

} // namespace

TEST(Alignment, FittingLoopTraceHasCostZero) {
    auto net = fn1();
    Aligner al(net);
    auto t = words("t1 t2 t4 t5 t3 t4 t5 t6");
    auto a = al.align(t);
    EXPECT_EQ(a.cost, 0.0);
    EXPECT_EQ(al.fitness(t, a), 1.0);
    std::size_t silent = 0, sync = 0;
    for (const auto& m : a.moves) {
        silent += m.kind == MoveKind::silent;
        sync += m.kind == MoveKind::synchronous;
    }
    EXPECT_EQ(silent, 1u);
    EXPECT_EQ(sync, 8u);
    expect_valid(net, t, a);
}

TEST(Alignment, EmptyTraceIsAllModelMoves) {
    auto net = fn1();
    Aligner al(net);
    std::vector<std::string> t;
    auto a = al.align(t);
    EXPECT_EQ(a.cost, 5.0);
    EXPECT_EQ(al.worst_case_cost(t), 5.0);
    EXPECT_EQ(al.fitness(t, a), 0.0);
    EXPECT_EQ(model_ids(net, a), (std::vector<std::string>{"t1", "t2", "t4", "t5", "t6"}));
}

TEST(Alignment, MisplacedT5) {
    auto net = fn1();
    Aligner al(net);
    auto t = words("t1 t5 t2 t4 t6");
    auto a = al.align(t);
    EXPECT_EQ(a.cost, 2.0);
    EXPECT_EQ(al.worst_case_cost(t), 10.0);
    EXPECT_DOUBLE_EQ(al.fitness(t, a), 0.8);
    auto labels = net.visible_labels();
    auto m = misalignments(a, labels);
    EXPECT_EQ(m.counts, (std::vector<std::uint32_t>{0, 0, 0, 0, 2, 0}));
    EXPECT_EQ(m.log_moves, 1u);
    EXPECT_EQ(m.model_moves, 1u);
    expect_valid(net, t, a);
}

TEST(Alignment, UnknownActivityGoesToUnknownCounter) {
    auto net = fn1();
    Aligner al(net);
    auto t = words("t1 x9 t2 t4 t5 t6");
    auto a = al.align(t);
    EXPECT_EQ(a.cost, 1.0);
    EXPECT_DOUBLE_EQ(al.fitness(t, a), 1.0 - 1.0 / 11.0);
    auto labels = net.visible_labels();
    auto m = misalignments(a, labels);
    EXPECT_EQ(m.unknown, 1u);
    EXPECT_EQ(m.total(), 1u);
}

TEST(Alignment, SilentMovesAreNotMisalignments) {
    auto net = fn1();
    Aligner al(net);
    auto labels = net.visible_labels();
    auto a = al.align(words("t1 t3 t4 t5 t2 t4 t5 t3 t4 t5 t6"));
    EXPECT_EQ(a.cost, 0.0);
    EXPECT_EQ(misalignments(a, labels).total(), 0u);
}

TEST(Alignment, DeterministicTieBreaking) {
    auto net = fn1();
    Aligner al(net);
    auto t = words("t4 t1 t6 t6 t3");
    auto a = al.align(t), b = al.align(t);
    ASSERT_EQ(a.moves.size(), b.moves.size());
    EXPECT_EQ(a.moves, b.moves);
}

TEST(Alignment, FormatShowsSkips) {
    auto net = fn1();
    auto a = Aligner(net).align(words("t1 t5 t2 t4 t6"));
    auto s = format(net, a);
    EXPECT_NE(s.find(">>"), std::string::npos);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
}

TEST(Alignment, MatchesOracleOnFn1) {
    auto net = fn1();
    Aligner al(net);
    Aligner plain(net, {}, {.heuristic = Heuristic::zero});
    std::vector<std::string> alphabet = net.visible_labels();
    alphabet.push_back("x1");
    alphabet.push_back("x2");
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 250; ++i) {
        auto t = testing_support::random_trace(rng, alphabet);
        auto a = al.align(t);
        auto o = oracle_cost(net, t);
        ASSERT_NEAR(a.cost, o.cost, 1e-9) << "trace #" << i;
        EXPECT_NEAR(plain.align(t).cost, o.cost, 1e-9);
        expect_valid(net, t, a);
        const double f = al.fitness(t, a);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
    }
}

TEST(Alignment, MatchesOracleOnGeneratedNets) {
    testing_support::NetGenerator gen(77, {"a", "b", "c", "d"});
    std::mt19937_64 rng(5);
    for (int n = 0; n < 6; ++n) {
        auto net = gen.next();
        Aligner al(net);
        auto alphabet = net.visible_labels();
        alphabet.push_back("x1");
        alphabet.push_back("x2");
        for (int i = 0; i < 60; ++i) {
            auto t = testing_support::random_trace(rng, alphabet);
            auto a = al.align(t);
            ASSERT_NEAR(a.cost, oracle_cost(net, t).cost, 1e-9) << petri::write_model(net);
            expect_valid(net, t, a);
        }
    }
}

TEST(Alignment, MatchesOracleUnderOtherCosts) {
    const std::vector<CostScheme> schemes{{2.0, 1.0, 0.0, 0.0}, {1.0, 3.0, 0.5, 0.0}, {0.7, 0.4, 0.1, 0.0}};
    testing_support::NetGenerator gen(99, {"a", "b", "c"});
    std::mt19937_64 rng(8);
    std::vector<petri::PetriNet> nets{fn1(), gen.next(), gen.next()};
    for (const auto& costs : schemes) {
        for (const auto& net : nets) {
            Aligner al(net, costs);
            auto alphabet = net.visible_labels();
            alphabet.push_back("x1");
            for (int i = 0; i < 40; ++i) {
                auto t = testing_support::random_trace(rng, alphabet, 6);
                auto a = al.align(t);
                ASSERT_NEAR(a.cost, oracle_cost(net, t, costs).cost, 1e-9);
                expect_valid(net, t, a, costs);
            }
        }
    }
}

TEST(Alignment, PlayoutTracesAlwaysFit) {
    testing_support::NetGenerator gen(3, {"a", "b", "c", "d"});
    for (int n = 0; n < 5; ++n) {
        auto net = gen.next();
        Aligner al(net);
        for (const auto& t : petri::playout(net, 20, n)) EXPECT_EQ(al.align(t.events).cost, 0.0);
    }
}

TEST(Alignment, CostBoundedByWorstCase) {
    auto net = testing_support::som();
    Aligner al(net);
    std::mt19937_64 rng(1);
    auto alphabet = net.visible_labels();
    for (int i = 0; i < 50; ++i) {
        auto t = testing_support::random_trace(rng, alphabet, 10);
        auto a = al.align(t);
        EXPECT_LE(a.cost, al.worst_case_cost(t) + 1e-9);
        EXPECT_GE(a.cost, 0.0);
    }
}

TEST(Alignment, ConcurrentCallsAgree) {
    auto net = testing_support::som();
    Aligner al(net);
    std::mt19937_64 rng(12);
    std::vector<std::vector<std::string>> traces;
    for (int i = 0; i < 40; ++i) traces.push_back(testing_support::random_trace(rng, net.visible_labels(), 10));
    std::vector<double> serial, par(traces.size());
    for (const auto& t : traces) serial.push_back(al.align(t).cost);
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < 4; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = static_cast<std::size_t>(w); i < traces.size(); i += 4) par[i] = al.align(traces[i]).cost;
            });
    }
    EXPECT_EQ(serial, par);
}

TEST(Alignment, StateCapExhaustion) {
    auto net = testing_support::som();
    Aligner al(net, {}, {.state_cap = 10});
    std::vector<std::string> t(12, "unk");
    EXPECT_THROW(al.align(t), AlignmentError);
}

TEST(Alignment, RejectsNetsWithoutReachableFinalMarking) {
    auto broken = petri::NetBuilder(fn1()).remove_arc("p5", "t6").build_relaxed();
    EXPECT_THROW(Aligner{broken}, AlignmentError);
}

TEST(Alignment, RejectsInvalidCosts) {
    EXPECT_THROW(Aligner(fn1(), {0.0, 1.0, 0.0, 0.0}), Error);
    EXPECT_THROW(Aligner(fn1(), {1.0, 1.0, 0.0, 0.5}), Error);
}

TEST(Alignment, WrappersAgreeWithAligner) {
    auto net = fn1();
    auto t = testing_support::trace("t1 t5 t2 t4 t6");
    EXPECT_EQ(optimal_alignment(net, t).cost, 2.0);
    EXPECT_EQ(worst_case_cost(net, t), 10.0);
    EXPECT_DOUBLE_EQ(trace_fitness(net, t), 0.8);
}

TEST(Coverage, NoiseFreeLogIsPerfect) {
    auto net = fn1();
    auto lg = petri::playout(net, 100, 3);
    EXPECT_EQ(coverage(net, lg), 1.0);
    EXPECT_EQ(log_fitness(net, lg), 1.0);
}

TEST(Coverage, CountsMisalignmentsOverAlignmentLength) {
    auto net = fn1();
    log::EventLog lg;
    lg.add(testing_support::trace("t1 t5 t2 t4 t6", "a"));  // 2 misalignments, 6 moves
    lg.add(testing_support::trace("t1 t2 t4 t5 t6", "b"));  // 0 of 5
    EXPECT_DOUBLE_EQ(coverage(net, lg), 1.0 - 2.0 / 11.0);
    EXPECT_DOUBLE_EQ(log_fitness(net, lg), (0.8 + 1.0) / 2);
    EXPECT_THROW(coverage(net, log::EventLog{}), Error);
}

TEST(Coverage, DecreasesWithDropRate) {
    auto net = testing_support::som();
    Aligner al(net);
    double prev = 1.0;
    for (double p : {0.05, 0.15, 0.30}) {
        petri::PlayoutOptions opt;
        opt.noise.p_drop = p;
        double c = coverage(al, petri::playout(net, 200, 1, opt));
        EXPECT_LT(c, prev);
        prev = c;
    }
}
