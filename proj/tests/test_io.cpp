#include <filesystem>
#include <fstream>

#include "ascsense/config.hpp"
#include "ascsense/csi_io.hpp"
#include "ascsense/outputs.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ascsense;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "ascsense_io_test";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST_CASE("CSI dump round trip is bit exact") {
  CsiDump d;
  d.M = 2;
  d.K = 4;
  d.T = 3;
  d.delta_f = 2.5e6;
  d.delta_t = 4e-3;
  d.data = testutil::random_matrix(7, 8, 3);
  const auto p = scratch("x.ascs").string();
  write_csi_dump(p, d);
  CHECK(fs::file_size(p) == 32 + 8 * 3 * 16);
  const CsiDump b = read_csi_dump(p);
  CHECK(b.M == 2);
  CHECK(b.K == 4);
  CHECK(b.T == 3);
  CHECK(b.delta_t == d.delta_t);
  CHECK((b.data - d.data).norm() == 0.0);
}

TEST_CASE("CSI dump errors") {
  CHECK_THROWS_WITH_AS(read_csi_dump(scratch("missing.ascs").string()), doctest::Contains("cannot open"), Error);
  const auto p = scratch("bad.ascs").string();
  {
    std::ofstream f(p, std::ios::binary);
    f << "NOPE and some more bytes to fill a header....";
  }
  try {
    read_csi_dump(p);
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::format);
  }
  CsiDump d;
  d.K = 4;
  d.T = 2;
  d.delta_f = 1e6;
  d.delta_t = 1e-3;
  d.data = testutil::random_matrix(1, 4, 2);
  const auto q = scratch("trunc.ascs").string();
  write_csi_dump(q, d);
  fs::resize_file(q, fs::file_size(q) - 5);
  CHECK_THROWS_AS(read_csi_dump(q), Error);
}

TEST_CASE("reference blob round trip") {
  ReferenceBlob b;
  b.K = 4;
  b.T_s = 100;
  b.delta_f = 2.5e6;
  b.timestamp_noise_std = 2.5e-9;
  b.clock_error_estimate = -3e-9;
  b.flags = 1;
  b.h = testutil::random_vector(3, 4);
  const auto p = scratch("r.asrf").string();
  write_reference_blob(p, b);
  const auto r = read_reference_blob(p);
  CHECK(r.flags == 1);
  CHECK(r.clock_error_estimate == b.clock_error_estimate);
  CHECK((r.h - b.h).norm() == 0.0);
}

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({"system": {"K": 16}, "experiment": {"snr_db": [10, 20],
                                  "methods": ["prop_sub", "ifft"], "trials": 7}})");
  CHECK(c.system.K == 16);
  CHECK(c.snr_db == std::vector<double>{10, 20});
  CHECK(c.methods == std::vector<Method>{Method::prop_sub, Method::ifft});
  CHECK(c.trials == 7);

  auto code_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::invalid_argument;
  };
  CHECK(code_of(R"({"system": {"KK": 3}})") == Errc::format);
  CHECK(code_of(R"({"system": {"K": "many"}})") == Errc::format);
  CHECK(code_of(R"({"experiment": {"methods": ["magic"]}})") == Errc::format);
  CHECK(code_of(R"({"experiment": {"trials": 0}})") == Errc::format);
  CHECK(code_of("{not json") == Errc::format);
  try {
    load_config(scratch("absent.json").string());
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

TEST_CASE("resolved config round trips") {
  ExperimentConfig c;
  c.system.M = 3;
  c.scenario.fixed_dynamic_aoas = {-0.2, 0.3, 0.1};
  c.tau_sep = {};
  c.seed = 99;
  const auto back = parse_config(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.scenario.fixed_dynamic_aoas[1] == doctest::Approx(0.3));
}

TEST_CASE("trials CSV round trip") {
  SweepTable t;
  SweepPoint pt;
  t.points.push_back(pt);
  MetricRecord r;
  r.method = Method::evlp;
  r.rel_to_error = 0.123456789012345;
  r.abs_to_error = 1.0 / 3.0;
  r.delay_rel_error = std::numeric_limits<double>::quiet_NaN();
  r.tau_sep = std::numeric_limits<double>::quiet_NaN();
  r.resolved = true;
  r.flags = "shortfall";
  t.trials.push_back(r);
  const auto dir = scratch("sweep").string();
  emit_outputs(t, dir);
  const auto back = read_trials_csv((fs::path(dir) / "trials.csv").string());
  REQUIRE(back.size() == 1);
  CHECK(back[0].method == Method::evlp);
  CHECK(back[0].rel_to_error == r.rel_to_error);
  CHECK(back[0].abs_to_error == r.abs_to_error);
  CHECK(std::isnan(back[0].delay_rel_error));
  CHECK(back[0].resolved);
  CHECK(back[0].flags == "shortfall");
  for (const char* f : {"targets.csv", "aggregates.csv", "timings.csv"})
    CHECK(fs::exists(fs::path(dir) / f));
}
