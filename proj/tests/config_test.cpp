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


#include "qram/config.hpp"

#include <gtest/gtest.h>

#include "qram/run_config.hpp"

using namespace qram;

namespace {

std::string error_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, ParsesEntriesCommentsAndWhitespace) {
    auto kv = KeyValueConfig::parse("# header\n\n layers = 3  \ne_t=1e-3 # trailing\nname = a b c\n");
    EXPECT_EQ(kv.entries().size(), 3u);
    EXPECT_EQ(kv.get_uint("layers"), 3u);
    EXPECT_DOUBLE_EQ(kv.get_double("e_t"), 1e-3);
    EXPECT_EQ(kv.get_string("name"), "a b c");
    EXPECT_EQ(kv.get_string("missing", "x"), "x");
    EXPECT_DOUBLE_EQ(kv.get_double("missing", 2.5), 2.5);
    EXPECT_FALSE(kv.has("missing"));
}

TEST(Config, ErrorsNameSourceAndLine) {
    auto dup = error_of([] { KeyValueConfig::parse("a = 1\nb = 2\na = 3\n", "run.cfg"); });
    EXPECT_NE(dup.find("run.cfg:3"), std::string::npos) << dup;
    EXPECT_NE(dup.find("duplicate"), std::string::npos);
    EXPECT_NE(error_of([] { KeyValueConfig::parse("just words\n"); }).find(":1:"), std::string::npos);
    EXPECT_FALSE(error_of([] { KeyValueConfig::parse("bad key = 1\n"); }).empty());
    EXPECT_FALSE(error_of([] { KeyValueConfig::parse(" = 1\n"); }).empty());
}

TEST(Config, TypedGettersReject) {
    auto kv = KeyValueConfig::parse("n = 12x\nd = 1.5.2\nneg = -3\n");
    EXPECT_THROW(kv.get_uint("n"), ConfigError);
    EXPECT_THROW(kv.get_double("d"), ConfigError);
    EXPECT_THROW(kv.get_uint("neg"), ConfigError);
    EXPECT_THROW(kv.get_string("absent"), ConfigError);
}

TEST(Config, DumpIsSortedAndRoundTrips) {
    KeyValueConfig kv;
    kv.set("zeta", "1");
    kv.set("alpha", 0.1);
    kv.set("mid.key", "x y");
    auto text = kv.dump();
    EXPECT_EQ(text, "alpha = 0.10000000000000001\nmid.key = x y\nzeta = 1\n");
    auto back = KeyValueConfig::parse(text);
    EXPECT_EQ(back.entries(), kv.entries());
    EXPECT_EQ(back.dump(), text);
    EXPECT_EQ(back.get_double("alpha"), 0.1);
}

TEST(RunConfig, DataSpecs) {
    QramGeometry g(2);
    EXPECT_EQ(parse_data_spec("all-ones", g).str(), "1111");
    EXPECT_EQ(parse_data_spec("all-zeros", g).str(), "0000");
    EXPECT_EQ(parse_data_spec("0110", g).str(), "0110");
    EXPECT_THROW(parse_data_spec("011", g), ConfigError);
    EXPECT_THROW(parse_data_spec("01a0", g), ConfigError);
}

TEST(RunConfig, AddressSpecs) {
    auto u = parse_address_spec("uniform", 2);
    EXPECT_EQ(u.components.size(), 4u);
    auto b = parse_address_spec("basis:10", 2);
    ASSERT_EQ(b.components.size(), 1u);
    EXPECT_EQ(b.components[0].index, 2u);
    auto bell = parse_address_spec("bell:00,11", 2);
    ASSERT_EQ(bell.components.size(), 2u);
    EXPECT_NEAR(std::norm(bell.components[0].amplitude), 0.5, 1e-15);
    auto p = parse_address_spec("product:1-", 2);
    ASSERT_EQ(p.components.size(), 2u);
    EXPECT_EQ(p.components[0].index, 2u);
    EXPECT_EQ(p.components[1].index, 3u);
    EXPECT_NEAR(p.components[1].amplitude.real(), -std::sqrt(0.5), 1e-15);
    for (const char *bad : {"basis:1", "basis:1x", "bell:01,01", "bell:01", "product:+", "product:0x", "nonsense"}) {
        EXPECT_THROW(parse_address_spec(bad, 2), ConfigError) << bad;
    }
}

TEST(RunConfig, AddressFile) {
    auto path = testing::TempDir() + "/address.txt";
    {
        std::ofstream out(path);
        out << "# amplitudes\n00 0.6\n11 0 0.8  # imaginary\n";
    }
    auto a = parse_address_spec("file:" + path, 2);
    ASSERT_EQ(a.components.size(), 2u);
    EXPECT_EQ(a.components[1].index, 3u);
    EXPECT_EQ(a.components[1].amplitude, Complex(0, 0.8));
    {
        std::ofstream out(path);
        out << "00 0.6\n11 0.6\n";
    }
    EXPECT_THROW(parse_address_spec("file:" + path, 2), ConfigError);
    {
        std::ofstream out(path);
        out << "00\n";
    }
    EXPECT_THROW(parse_address_spec("file:" + path, 2), ConfigError);
    EXPECT_THROW(parse_address_spec("file:/nonexistent/address.txt", 2), ConfigError);
}

TEST(RunConfig, Lists) {
    EXPECT_EQ(parse_uint_range("2..5", "layers"), (std::vector<uint32_t>{2, 3, 4, 5}));
    EXPECT_EQ(parse_uint_range("1,4,6", "layers"), (std::vector<uint32_t>{1, 4, 6}));
    EXPECT_THROW(parse_uint_range("5..2", "layers"), ConfigError);
    EXPECT_THROW(parse_uint_range("1,x", "layers"), ConfigError);
    EXPECT_EQ(parse_double_list("1e-4,2e-4", "e_t"), (std::vector<double>{1e-4, 2e-4}));
    EXPECT_THROW(parse_double_list("", "e_t"), ConfigError);
    EXPECT_THROW(parse_double_list("0.1,abc", "e_t"), ConfigError);
}
