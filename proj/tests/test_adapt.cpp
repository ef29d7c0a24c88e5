// SPDX-License-Identifier: Apache-2.0
#include "wgcd/adapt.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

using namespace wgcd;

namespace {

EstimatorReport fake_report(std::vector<int> ids, std::vector<double> eta)
{
    EstimatorReport r;
    r.cell_ids = std::move(ids);
    r.eta_T = std::move(eta);
    return r;
}

std::vector<int> sort_oracle(const EstimatorReport& r, double fraction)
{
    const auto n = r.cell_ids.size();
    std::vector<std::pair<double, int>> v;
    for (std::size_t i = 0; i < n; ++i)
        v.emplace_back(-r.eta_T[i], r.cell_ids[i]);
    std::sort(v.begin(), v.end());
    const auto m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    std::vector<int> out;
    for (std::size_t i = 0; i < std::max<std::size_t>(m, 1); ++i)
        out.push_back(v[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(Mark, AllEqualTakesLowestIds)
{
    const EstimatorReport r = fake_report({12, 3, 40, 7, 9, 21, 5, 30}, std::vector<double>(8, 1.0));
    EXPECT_EQ(mark(r, 0.25), (std::vector<int>{3, 5}));
}

TEST(Mark, LargestIndicatorsWin)
{
    const EstimatorReport r = fake_report({0, 1, 2, 3, 4}, {0.1, 5.0, 0.3, 4.0, 0.2});
    EXPECT_EQ(mark(r, 0.4), (std::vector<int>{1, 3}));
    EXPECT_EQ(mark(r, 0.01), (std::vector<int>{1}));
}

TEST(Mark, RandomAgainstSortOracle)
{
    std::mt19937 gen(8);
    std::uniform_int_distribution<int> size(1, 200);
    std::uniform_int_distribution<int> level(0, 4);
    std::uniform_real_distribution<double> frac(0.01, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = size(gen);
        std::vector<int> ids(static_cast<std::size_t>(n));
        std::iota(ids.begin(), ids.end(), 0);
        std::shuffle(ids.begin(), ids.end(), gen);
        std::vector<double> eta;
        for (int i = 0; i < n; ++i)
            eta.push_back(std::ldexp(1.0, -level(gen))); // many ties
        const EstimatorReport r = fake_report(ids, eta);
        const double f = frac(gen);
        EXPECT_EQ(mark(r, f), sort_oracle(r, f)) << trial;
    }
}

TEST(Mark, EmptyAndFullAndInvalid)
{
    EXPECT_TRUE(mark(EstimatorReport{}, 0.5).empty());
    const EstimatorReport r = fake_report({4, 2, 8}, {1.0, 3.0, 2.0});
    EXPECT_EQ(mark(r, 1.0), (std::vector<int>{2, 4, 8}));
    EXPECT_THROW(mark(r, 0.0), InvalidArgument);
    EXPECT_THROW(mark(r, 1.5), InvalidArgument);
    EXPECT_THROW(mark(r, std::nan("")), InvalidArgument);
}

TEST(AdaptiveLoop, SingleLevelGivesOneRecord)
{
    AdaptOptions opt;
    opt.levels = 1;
    opt.n0 = 4;
    const AdaptResult res = adaptive_loop(boundary_layer(0.1), opt);
    ASSERT_EQ(res.records.size(), 1u);
    EXPECT_EQ(res.records[0].level, 0);
    EXPECT_EQ(res.records[0].cells, 16);
    EXPECT_TRUE(res.solution.has_value());
    EXPECT_TRUE(res.records[0].effectivity().has_value());
}

TEST(AdaptiveLoop, UniformModeRefinesEverything)
{
    AdaptOptions opt;
    opt.levels = 3;
    opt.n0 = 2;
    opt.uniform = true;
    opt.k = 1;
    const AdaptResult res = adaptive_loop(manufactured_poly(1), opt);
    ASSERT_EQ(res.records.size(), 3u);
    EXPECT_EQ(res.records[0].cells, 4);
    EXPECT_EQ(res.records[1].cells, 16);
    EXPECT_EQ(res.records[2].cells, 64);
    for (const ConvergenceRecord& r : res.records)
        EXPECT_LT(*r.energy_err, 1e-9);
}

TEST(AdaptiveLoop, DofsIncreaseAndRunIsDeterministic)
{
    AdaptOptions opt;
    opt.levels = 5;
    opt.n0 = 4;
    int callbacks = 0;
    opt.on_level = [&](const LevelData& d) {
        EXPECT_EQ(d.level, callbacks++);
        EXPECT_EQ(d.mesh.num_leaves(), d.record.cells);
        EXPECT_EQ(d.solution.dofmap().n_free(), d.record.dofs);
    };
    const AdaptResult a = adaptive_loop(boundary_layer(1e-2), opt);
    EXPECT_EQ(callbacks, 5);
    opt.on_level = nullptr;
    const AdaptResult b = adaptive_loop(boundary_layer(1e-2), opt);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        if (i > 0) {
            EXPECT_GT(a.records[i].dofs, a.records[i - 1].dofs);
        }
        EXPECT_EQ(a.records[i].dofs, b.records[i].dofs);
        EXPECT_EQ(a.records[i].eta, b.records[i].eta);
        EXPECT_EQ(*a.records[i].energy_err, *b.records[i].energy_err);
    }
    EXPECT_TRUE(std::ranges::equal(a.mesh.leaves(), b.mesh.leaves()));
}

TEST(AdaptiveLoop, SolverFailureNamesLevel)
{
    AdaptOptions opt;
    opt.levels = 2;
    opt.n0 = 8;
    opt.solver.force_iterative = true;
    opt.solver.gmres_restart = 2;
    opt.solver.gmres_max_cycles = 1;
    opt.solver.ilut_drop_tol = 1.0;
    opt.solver.ilut_fill_factor = 1;
    try {
        (void)adaptive_loop(boundary_layer(1e-3), opt);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("level 0"), std::string::npos) << e.what();
    }
}

TEST(AdaptiveLoop, RejectsBadOptions)
{
    AdaptOptions opt;
    opt.levels = 0;
    EXPECT_THROW(adaptive_loop(boundary_layer(0.1), opt), InvalidArgument);
    opt.levels = 1;
    opt.fraction = 0.0;
    EXPECT_THROW(adaptive_loop(boundary_layer(0.1), opt), InvalidArgument);
    opt.fraction = 0.5;
    opt.k = 0;
    EXPECT_THROW(adaptive_loop(boundary_layer(0.1), opt), UnsupportedDegree);
}

TEST(ConvergenceCsv, RowFormatting)
{
    ConvergenceRecord r;
    r.level = 3;
    r.dofs = 1234;
    r.eta = 0.5;
    r.osc = 0.25;
    r.energy_err = 0.125;
    r.star_err = 0.125;
    std::ostringstream os;
    write_convergence_csv(os, {r});
    EXPECT_EQ(os.str(), "level,dofs,eta,energy_err,star_err,osc,effectivity\n"
                        "3,1234,5.000000000000e-01,1.250000000000e-01,1.250000000000e-01,2.500000000000e-01,"
                        "3.000000000000e+00\n");
}

TEST(ConvergenceCsv, MissingExactSolutionLeavesFieldsEmpty)
{
    ConvergenceRecord r;
    r.level = 0;
    r.dofs = 7;
    r.eta = 1.0;
    r.osc = 0.0;
    std::ostringstream os;
    write_convergence_row(os, r);
    EXPECT_EQ(os.str(), "0,7,1.000000000000e+00,,,0.000000000000e+00,\n");
}
