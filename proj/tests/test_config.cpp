#include <catch2/catch.hpp>

#include "vaereg/config.hpp"

using namespace vaereg;

TEST_CASE("config parsing with sections, comments and defaults") {
    const std::string text =
        "# run setup\n"
        "seed = 42\n"
        "\n"
        "[synthetic]\n"
        "n = 100\n"
        "sigma_z = 0.25\n"
        "\n"
        "[train]\n"
        "epochs = 50\n"
        "kl_mode = mc\n";
    const RunConfig cfg = RunConfig::from_config(ConfigFile::parse_text(text), "<test>");
    REQUIRE(cfg.seed == 42);
    REQUIRE(cfg.synthetic.n == 100);
    REQUIRE(cfg.synthetic.sigma_z == 0.25);
    REQUIRE(cfg.synthetic.dims == 30);  // untouched default
    REQUIRE(cfg.train.epochs == 50);
    REQUIRE(cfg.train.kl_mode == "mc");
    REQUIRE(cfg.train.batch_size == 32);
    REQUIRE(cfg.cv.methods ==
            std::vector<std::string>{"lr", "ridge", "knn", "nn", "vae"});
}

TEST_CASE("unknown keys and sections are rejected") {
    REQUIRE_THROWS_WITH(
        RunConfig::from_config(ConfigFile::parse_text("[train]\nepoch = 3\n"), "<t>"),
        Catch::Contains("unknown configuration key"));
    REQUIRE_THROWS_WITH(
        RunConfig::from_config(ConfigFile::parse_text("[trainer]\nepochs = 3\n"), "<t>"),
        Catch::Contains("unknown configuration key"));
    REQUIRE_THROWS_WITH(RunConfig::from_config(ConfigFile::parse_text("sed = 1\n"), "<t>"),
                        Catch::Contains("unknown configuration key"));
}

TEST_CASE("malformed values are rejected with location") {
    REQUIRE_THROWS_WITH(
        RunConfig::from_config(ConfigFile::parse_text("[train]\nepochs = soon\n"), "<t>"),
        Catch::Contains("epochs"));
    REQUIRE_THROWS_AS(ConfigFile::parse_text("[broken\nx = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(ConfigFile::parse_text("just some words\n"), ConfigError);
    REQUIRE_THROWS_AS(
        RunConfig::from_config(ConfigFile::parse_text("[model]\nlearn_sigma = maybe\n"), "<t>"),
        ConfigError);
}

TEST_CASE("missing config file error names the path") {
    REQUIRE_THROWS_WITH(RunConfig::from_file("/nonexistent/dir/run.cfg"),
                        Catch::Contains("/nonexistent/dir/run.cfg"));
}

TEST_CASE("resolved config echo is a fixed point") {
    const std::string text =
        "seed = 7\n[model]\ntrunk = 64,16\nlatent_dim = 5\n[cv]\nmethods = lr,vae\n";
    const RunConfig cfg = RunConfig::from_config(ConfigFile::parse_text(text), "<t>");
    const std::string echo = cfg.resolved();
    const RunConfig reparsed = RunConfig::from_config(ConfigFile::parse_text(echo), "<echo>");
    REQUIRE(reparsed.resolved() == echo);
    REQUIRE(reparsed.model.trunk == std::vector<std::size_t>{64, 16});
    REQUIRE(reparsed.cv.methods == std::vector<std::string>{"lr", "vae"});
    REQUIRE(reparsed.seed == 7);
}
