#include "doctest.h"

#include "vigil/config.hpp"
#include "vigil/error.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>

using namespace vigil;

namespace {

std::filesystem::path write_ini(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::optional<ErrorCode> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const auto c = default_config();
    CHECK(c.separation == SeparationMethod::IcaMinus);
    CHECK(c.banding == Banding::TwoHz);
    CHECK(c.window_s == 8.0);
    CHECK(c.seed == 7);
    CHECK(c.model.svr_grid.c.size() == 11);
    CHECK(c.model.svr_grid.g.size() == 11);
    CHECK(c.model.crf.k1 == std::vector<int>{10, 20, 30});
    CHECK(c.model.sequence_length == 7);
  }

  TEST_CASE("file values and overrides") {
    const auto p = write_ini("vigil_cfg_a.ini",
                             "[pipeline]\nbanding = 5band\nseparation = minus\n[eval]\nmodels = ccrf\n[run]\nseed = 11\n");
    const auto c = load_config(p, {"run.seed=12", "svr.c_exp=0:2"});
    CHECK(c.banding == Banding::FiveBand);
    CHECK(c.separation == SeparationMethod::Minus);
    CHECK(c.models == std::vector<ModelKind>{ModelKind::Ccrf});
    CHECK(c.seed == 12);
    CHECK(c.model.svr_grid.c == std::vector<double>{1.0, 2.0, 4.0});
    std::filesystem::remove(p);
  }

  TEST_CASE("bad settings are configuration errors") {
    CHECK(code_of([] { load_config({}, {"run.sed=1"}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { load_config({}, {"run.seed=abc"}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { load_config({}, {"eval.modalities=eeg-frontal"}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { load_config({}, {"crf.validation_sessions=-1"}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { load_config({}, {"input.forehead=/nonexistent.csv"}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { load_config({}, {"noequals"}); }) == ErrorCode::InvalidConfig);
    const auto p = write_ini("vigil_cfg_b.ini", "[pipeline]\nwindow_s = 8\nbogus = 1\n");
    CHECK(code_of([&] { load_config(p); }) == ErrorCode::InvalidConfig);
    std::filesystem::remove(p);
  }

  TEST_CASE("hash ignores jobs and output directory only") {
    const auto base = config_hash(default_config());
    CHECK(base.size() == 64);
    CHECK(config_hash(load_config({}, {"run.jobs=3", "run.out=/tmp/x"})) == base);
    CHECK(config_hash(load_config({}, {"run.seed=8"})) != base);
    CHECK(config_hash(load_config({}, {"pipeline.banding=5band"})) != base);
    CHECK(canonical_text(default_config()).find("run.jobs") == std::string::npos);
  }

  TEST_CASE("modality names") {
    for (const char* m : {"eog", "eeg-forehead", "eeg-temporal", "eeg-posterior", "fusion-forehead", "fusion-posterior"})
      CHECK(is_valid_modality(m));
    CHECK(!is_valid_modality("fusion-eog"));
    CHECK(!is_valid_modality("eeg"));
  }
}
