#include <doctest.h>

#include "liemidpoint/config.hpp"
#include "liemidpoint/toml.hpp"

using namespace lmp;
using nlohmann::json;

namespace {

const char* kRigidBody = R"(
# comment
[model]
kind = "rigid_body"
inertia = [1.0, 2.0, 3.0]

[[noise]]
kind = "linear_momentum"
chi = [0.02, 0.0, 0.0]

[initial]
mu = [-0.5878, 0.0, 0.8090]

[run]
dt = 0.01
t_final = 50.0
seed = 42
)";

const char* kHeavyTop = R"(
[model]
kind = "heavy_top"
inertia = [0.1, 0.1, 1.0]
mass = 0.1
gravity = 9.8
lever = [0.0, 0.0, 1.0]

[initial]
mu = [0.0, 0.0, 1.0]
rotation = [
  [1.0, 0.0, 0.0],
  [0.0, 0.8910065241883679, 0.45399049973954675],
  [0.0, -0.45399049973954675, 0.8910065241883679],
]

[run]
dt = 0.01
t_final = 1.0
)";

} // namespace

TEST_SUITE("config") {

TEST_CASE("toml parser handles the config subset") {
    const json doc = toml::parse(R"(
title = "x"
count = 3
rate = 2.5e-3
flag = true
values = [1, 2, 3]
nested = [[1.0, 0.0], [0.0, 1.0]]

[table]
key = "v"

[table.sub]
n = 1

[[items]]
a = 1

[[items]]
a = 2
)");
    CHECK(doc["title"] == "x");
    CHECK(doc["count"] == 3);
    CHECK(doc["rate"] == 2.5e-3);
    CHECK(doc["flag"] == true);
    CHECK(doc["values"] == json({1, 2, 3}));
    CHECK(doc["nested"][1][1] == 1.0);
    CHECK(doc["table"]["key"] == "v");
    CHECK(doc["table"]["sub"]["n"] == 1);
    CHECK(doc["items"].size() == 2);
    CHECK(doc["items"][1]["a"] == 2);
}

TEST_CASE("toml parser rejects what it does not support") {
    CHECK_THROWS_AS((void)toml::parse("a = {x = 1}"), ConfigError);
    CHECK_THROWS_AS((void)toml::parse("a.b = 1"), ConfigError);
    CHECK_THROWS_AS((void)toml::parse("a = 'literal'"), ConfigError);
    CHECK_THROWS_AS((void)toml::parse("a = 1 b = 2"), ConfigError);
    CHECK_THROWS_AS((void)toml::parse("a = 1\na = 2"), ConfigError);
    CHECK_THROWS_AS((void)toml::parse("a = 2020-01-01"), ConfigError);
    CHECK_THROWS_AS((void)toml::parse("[unclosed"), ConfigError);
}

TEST_CASE("toml parse/serialize round trip is the identity") {
    for (const char* text : {kRigidBody, kHeavyTop}) {
        const json once = toml::parse(text);
        const json twice = toml::parse(toml::serialize(once));
        CHECK(once == twice);
    }
    // integers and floats survive with their types
    const json typed = toml::parse("i = 3\nf = 3.0\ns = \"3\"\nneg = -1e-12");
    const json round = toml::parse(toml::serialize(typed));
    CHECK(round["i"].is_number_integer());
    CHECK(round["f"].is_number_float());
    CHECK(round["s"].is_string());
    CHECK(round == typed);
}

TEST_CASE("config canonical form round trips") {
    const RunConfig cfg = RunConfig::from_toml(kRigidBody);
    const RunConfig again = RunConfig::from_toml(cfg.to_toml());
    CHECK(cfg.canonical == again.canonical);
    CHECK(cfg.hash() == again.hash());

    const RunConfig other = RunConfig::from_toml(kHeavyTop);
    CHECK(cfg.hash() != other.hash());
}

TEST_CASE("config parsing fills the model") {
    const RunConfig cfg = RunConfig::from_toml(kRigidBody);
    CHECK(cfg.model == ModelKind::rigid_body);
    CHECK(cfg.inertia(1, 1) == 2.0);
    CHECK(cfg.noise.size() == 1);
    CHECK(cfg.seed == 42);
    CHECK(cfg.steps() == 5000);
    CHECK(cfg.mu0.x == -0.5878);

    const RunConfig top = RunConfig::from_toml(kHeavyTop);
    CHECK(top.model == ModelKind::heavy_top);
    CHECK(top.mass == 0.1);
    const Vec3 gamma0 = top.initial_gamma();
    CHECK(gamma0.y == doctest::Approx(-0.45399049973954675).epsilon(1e-15));
    CHECK(gamma0.z == doctest::Approx(0.8910065241883679).epsilon(1e-15));
}

TEST_CASE("config validation errors") {
    auto expect_bad = [](const std::string& text) {
        CHECK_THROWS_AS((void)RunConfig::from_toml(text), ConfigError);
    };
    // gamma noise on a rigid body
    expect_bad(R"(
[model]
kind = "rigid_body"
inertia = [1.0, 2.0, 3.0]
[[noise]]
kind = "gamma_z"
k = 1.0
[initial]
mu = [0.0, 0.0, 1.0]
[run]
dt = 0.01
t_final = 1.0
)");
    // dt <= 0
    expect_bad(R"(
[model]
kind = "rigid_body"
inertia = [1.0, 2.0, 3.0]
[initial]
mu = [0.0, 0.0, 1.0]
[run]
dt = 0.0
t_final = 1.0
)");
    // t_final < dt
    expect_bad(R"(
[model]
kind = "rigid_body"
inertia = [1.0, 2.0, 3.0]
[initial]
mu = [0.0, 0.0, 1.0]
[run]
dt = 0.01
t_final = 0.001
)");
    // non-rotation initial matrix
    expect_bad(R"(
[model]
kind = "rigid_body"
inertia = [1.0, 2.0, 3.0]
[initial]
mu = [0.0, 0.0, 1.0]
rotation = [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
[run]
dt = 0.01
t_final = 1.0
)");
    // non-SPD inertia
    expect_bad(R"(
[model]
kind = "rigid_body"
inertia = [1.0, -2.0, 3.0]
[initial]
mu = [0.0, 0.0, 1.0]
[run]
dt = 0.01
t_final = 1.0
)");
    // unknown noise kind
    expect_bad(R"(
[model]
kind = "rigid_body"
inertia = [1.0, 2.0, 3.0]
[[noise]]
kind = "mystery"
k = 1.0
[initial]
mu = [0.0, 0.0, 1.0]
[run]
dt = 0.01
t_final = 1.0
)");
}

TEST_CASE("euler-angle initial rotation") {
    const RunConfig cfg = RunConfig::from_toml(R"(
[model]
kind = "heavy_top"
inertia = [0.1, 0.1, 1.0]
mass = 0.1
gravity = 9.8
lever = [0.0, 0.0, 1.0]
[initial]
mu = [0.0, 0.0, 1.0]
rotation_euler = [0.3, 0.5, 1.0]
[run]
dt = 0.01
t_final = 1.0
)");
    REQUIRE(cfg.rotation0.has_value());
    CHECK(orthogonality_defect(cfg.rotation0->matrix()) <= 1e-14);
    CHECK(cfg.rotation0->matrix()(2, 2) == doctest::Approx(std::cos(0.5)).epsilon(1e-14));
}

} // TEST_SUITE
