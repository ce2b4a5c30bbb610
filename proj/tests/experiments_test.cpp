// Copyright 2026 The qram-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "qram/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace qram;

TEST(Fit, OrdinaryLeastSquares) {
    // Reference values from an independent normal-equations solve.
    auto f = fit_line({1, 2, 3, 4}, {2.1, 3.9, 6.2, 7.8});
    EXPECT_FALSE(f.weighted);
    EXPECT_NEAR(f.slope, 1.94, 1e-12);
    EXPECT_NEAR(f.intercept, 0.15, 1e-12);
    EXPECT_NEAR(f.stderr_slope, 0.09055385138137424, 1e-12);
    EXPECT_NEAR(f.stderr_intercept, 0.2479919353527451, 1e-12);
    // Sigmas within 3x of each other leave the fit unweighted.
    EXPECT_FALSE(fit_line({1, 2, 3, 4}, {2.1, 3.9, 6.2, 7.8}, {0.1, 0.1, 0.3, 0.3}).weighted);
}

TEST(Fit, InverseVarianceWeighting) {
    auto f = fit_line({1, 2, 3, 4}, {2.1, 3.9, 6.2, 7.8}, {0.1, 0.1, 0.5, 0.5});
    EXPECT_TRUE(f.weighted);
    EXPECT_NEAR(f.slope, 1.869516728624532, 1e-12);
    EXPECT_NEAR(f.intercept, 0.20576208178439392, 1e-12);
    EXPECT_NEAR(f.stderr_slope, 0.10991717057228631, 1e-12);
    EXPECT_NEAR(f.stderr_intercept, 0.186685031845731, 1e-12);
}

TEST(Fit, DegenerateInputs) {
    EXPECT_THROW(fit_line({1}, {1}), std::invalid_argument);
    EXPECT_THROW(fit_line({1, 1}, {1, 2}), std::invalid_argument);
    EXPECT_THROW(fit_line({1, 2}, {1, 2}, {1}), std::invalid_argument);
    auto two = fit_line({0, 1}, {1, 3});
    EXPECT_DOUBLE_EQ(two.slope, 2.0);
    EXPECT_TRUE(std::isnan(two.stderr_slope));
}

TEST(Experiments, ScalingCsvFollowsSchema) {
    RunOptions opt{2000, 3, 1};
    auto r = scaling_experiment({2, 3}, 1e-3, opt);
    auto csv = r.to_csv();
    auto p = parse_experiment_csv(csv);
    EXPECT_EQ(p.rows.size(), 2u);
    EXPECT_EQ(p.header.front(), "param.layers");
    EXPECT_EQ(p.header.back(), "flag");
    EXPECT_EQ(p.rows[1][p.column("param.layers")], "3");
    EXPECT_EQ(p.rows[0][p.column("n_samples")], "2000");
    EXPECT_EQ(p.rows[0][p.column("seed")], "3");
    ASSERT_EQ(p.fits.size(), 1u);
    EXPECT_EQ(p.fits[0].at("label"), "scaling");
    EXPECT_EQ(p.fits[0].at("rows"), "0,1");
    EXPECT_EQ(p.meta.at("data"), "all-ones");
    double f = std::stod(p.rows[0][p.column("fidelity")]);
    EXPECT_EQ(f, *r.rows[0].fidelity);  // shortest round-trip formatting
    EXPECT_THROW(scaling_experiment({2}, 1e-3, RunOptions{500, 1, 1}), std::invalid_argument);
}

TEST(Experiments, CsvParserRejectsMalformedFiles) {
    const std::string head = "param.a,fidelity,fidelity_ci,infidelity,valid_fraction,valid_fraction_ci,n_samples,seed,flag\n";
    const std::string row = "1,0.9,0.01,0.1,1,0,10,1,\n";
    EXPECT_NO_THROW(parse_experiment_csv(head + row + "# fit slope=1 stderr=0.1 rows=0\n"));
    EXPECT_THROW(parse_experiment_csv(""), std::invalid_argument);
    EXPECT_THROW(parse_experiment_csv("param.a,fidelity\n"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_csv(head + "1,2\n"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_csv(head + row + "# fit slope=1 rows=0\n"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_csv(head + row + "# fit slope=1 stderr=1 rows=3\n"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_csv("bogus," + head), std::invalid_argument);
}

TEST(Experiments, NoiselessScalingHasNoFit) {
    auto r = scaling_experiment({2, 3}, 0.0, RunOptions{1000, 1, 1});
    for (const auto &row : r.rows) {
        EXPECT_EQ(*row.fidelity, 1.0);
        EXPECT_EQ(*row.infidelity, 0.0);
        EXPECT_TRUE(row.flag.empty());
    }
    EXPECT_EQ(r.fit("scaling"), nullptr);
    auto p = parse_experiment_csv(r.to_csv());
    EXPECT_EQ(p.meta.at("fit"), "absent");
}

TEST(Experiments, ReproducibleForSeedAndThreadCount) {
    auto a = scaling_experiment({2, 3}, 2e-3, RunOptions{1500, 9, 1});
    auto b = scaling_experiment({2, 3}, 2e-3, RunOptions{1500, 9, 3});
    auto c = scaling_experiment({2, 3}, 2e-3, RunOptions{1500, 10, 1});
    EXPECT_EQ(a.to_csv(), b.to_csv());
    EXPECT_NE(a.to_csv(), c.to_csv());
}

TEST(Experiments, JsonMirrorsCsv) {
    auto r = scaling_experiment({2, 3}, 1e-3, RunOptions{1000, 2, 1});
    auto j = r.to_json();
    EXPECT_EQ(j["id"], "scaling");
    ASSERT_EQ(j["rows"].size(), 2u);
    EXPECT_EQ(j["rows"][0]["param.layers"], 2);
    EXPECT_EQ(j["rows"][0]["fidelity"].get<double>(), *r.rows[0].fidelity);
    EXPECT_EQ(j["fits"][0]["label"], "scaling");
    EXPECT_EQ(j["meta"]["address"], "uniform");
    std::vector<std::string> cols = j["columns"];
    EXPECT_EQ(cols, r.columns());

    auto dir = std::filesystem::path(testing::TempDir()) / "qram_results";
    std::filesystem::create_directories(dir);
    auto paths = write_result(r, dir.string(), 2);
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_EQ(std::filesystem::path(paths[0]).filename(), "scaling_seed2.csv");
    std::ifstream in(paths[1]);
    auto back = Json::parse(in);
    EXPECT_EQ(back, j);
}

TEST(Experiments, MitigationZeroLayersEqualsUnmitigated) {
    RunOptions opt{1000, 5, 1};
    auto m = mitigation_sweep(2, 3e-3, {0, 1, 2}, opt);
    ASSERT_EQ(m.rows.size(), 3u);
    QramGeometry g(2);
    QueryTask task(g, AddressState::uniform(2), ClassicalData::filled(4, 1));
    auto direct = mitigated_query(task, NoiseModel::standard(3e-3), {0}, opt.samples, derive_seed(opt.seed, 2), false, 1);
    EXPECT_EQ(*m.rows[0].fidelity, direct.fidelity);
    EXPECT_EQ(*m.rows[0].valid_fraction, 1.0);
    EXPECT_LE(*m.rows[2].valid_fraction, *m.rows[1].valid_fraction);
    EXPECT_EQ(m.id, "mitigation_L2");
    EXPECT_THROW(mitigation_sweep(2, 1e-3, {3}, opt), std::invalid_argument);
}

TEST(Experiments, InfidelityIsLinearInErrorRate) {
    RunOptions opt{40000, 13, 0};
    auto lo = scaling_experiment({3}, 1e-4, opt);
    auto hi = scaling_experiment({3}, 2e-4, opt);
    double ratio = *hi.rows[0].infidelity / *lo.rows[0].infidelity;
    EXPECT_GT(ratio, 1.7);
    EXPECT_LT(ratio, 2.3);
}

TEST(Experiments, InjectionMatchesExactLine) {
    QramGeometry g(2);
    auto address = AddressState::basis(2, 0);
    auto data = ClassicalData::from_string("1010");
    auto r = injection_experiment(2, address, data, {2, 3}, {0.0, 0.3}, RunOptions{2000, 4, 1});
    ASSERT_EQ(r.rows.size(), 4u);
    for (const auto &row : r.rows) {
        auto exact = *row.metric("exact_fidelity");
        if (row.param_double("p") == 0.0) {
            EXPECT_EQ(*row.fidelity, 1.0);
            EXPECT_EQ(exact, 1.0);
        }
        EXPECT_LE(std::abs(*row.fidelity - exact), *row.fidelity_ci + 1e-12);
    }
    // Node 3 is off the queried path: the injection leaves the query untouched.
    EXPECT_EQ(*r.rows[3].fidelity, 1.0);
    ASSERT_NE(r.fit("node2"), nullptr);
    EXPECT_LT(r.fit("node2")->slope, 0.0);
    auto line = injection_exact_line(g, address, data, g.control(2));
    EXPECT_NEAR(line.at(0.75), line.f0 + line.slope(), 1e-12);
}

TEST(Experiments, EntropyRowsPerNode) {
    auto r = entropy_by_layer(2, AddressState::uniform(2));
    ASSERT_EQ(r.rows.size(), 3u);
    auto layers = layer_entropies(r);
    ASSERT_EQ(layers.size(), 2u);
    EXPECT_NEAR(*r.rows[1].metric("entropy"), *r.rows[2].metric("entropy"), 1e-12);
    EXPECT_GT(layers[0], layers[1]);
    auto basis = entropy_by_layer(2, AddressState::basis(2, 1));
    for (const auto &row : basis.rows) EXPECT_NEAR(*row.metric("entropy"), 0.0, 1e-12);
}

TEST(Experiments, ContourTargets) {
    RunOptions opt{1000, 6, 1};
    auto r = threshold_contour({2, 3}, {0, 1e-3, 3e-3}, {1.0}, opt);
    for (const auto &row : r.rows) {
        if (!row.metric("eps_star")) continue;
        EXPECT_EQ(*row.metric("eps_star"), 0.0);
        EXPECT_EQ(row.flag, "degenerate");
    }
    EXPECT_NE(r.fit("linear.L2"), nullptr);
    EXPECT_THROW(threshold_contour({2}, {0, 1e-3}, {0.2}, opt), std::runtime_error);
}

TEST(Experiments, TeleportRows) {
    auto r = teleport_experiment(RunOptions{400, 8, 1});
    ASSERT_EQ(r.rows.size(), 12u);
    for (const auto &row : r.rows) {
        EXPECT_NEAR(*row.fidelity, 1.0, 1e-12);
        if (row.param("mode")->get<std::string>() == "postselect") {
            EXPECT_NEAR(*row.valid_fraction, 0.25, 1e-12);
        } else {
            double p1 = *row.metric("p1_source"), est = *row.metric("p1_estimate"), ci = *row.metric("p1_ci");
            if (p1 == 0.0 || p1 == 1.0) {
                EXPECT_EQ(est, p1);
            } else {
                EXPECT_LE(std::abs(est - p1), 2 * ci);
            }
        }
    }
}
