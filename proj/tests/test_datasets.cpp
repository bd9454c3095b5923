#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "earda/datasets.hpp"
#include "earda/errors.hpp"
#include "support.hpp"

using namespace earda;
using namespace earda::datasets;
using earda::test::TempDir;
using earda::test::write_text;

namespace {

std::vector<LabeledWindow> numbered(std::size_t per_class) {
  std::vector<LabeledWindow> out;
  for (int c = 0; c < kNumActivities; ++c)
    for (std::size_t i = 0; i < per_class; ++i)
      out.push_back(make_window(Eigen::MatrixXd::Constant(100, 2, 1.0), activity_from_index(c),
                                DomainTag::Source, HeadMovement::None,
                                std::to_string(c) + "/" + std::to_string(i)));
  return out;
}

std::set<std::string> origins(const std::vector<LabeledWindow>& ws) {
  std::set<std::string> s;
  for (const auto& w : ws) s.insert(w.origin);
  return s;
}

void check_four_second_windows(const std::vector<LabeledWindow>& ws) {
  for (const auto& w : ws) {
    CHECK(w.data.rows() == 100);
    CHECK(w.data.cols() == 2);
    CHECK(static_cast<double>(w.data.rows()) / kModelRateHz == 4.0);
    CHECK(w.data.allFinite());
  }
}

std::vector<LabeledWindow> run_pipeline(const std::vector<signal::RawRecording>& recs) {
  std::vector<LabeledWindow> out;
  for (const auto& r : recs) {
    auto ws = preprocess_recording(r, PreprocessOptions{});
    out.insert(out.end(), ws.begin(), ws.end());
  }
  return out;
}

}  // namespace

TEST_CASE("split sizes are exact") {
  {
    const auto ws = numbered(210);  // 840
    const auto s = split(ws, {0.10, 0.10, 0.80, 3});
    CHECK(s.train.size() == 84);
    CHECK(s.val.size() == 84);
    CHECK(s.test.size() == 672);
  }
  {
    const auto ws = numbered(2500);  // 10,000
    const auto s = split(ws, {0.80, 0.10, 0.10, 4});
    CHECK(s.train.size() == 8000);
    CHECK(s.val.size() == 1000);
    CHECK(s.test.size() == 1000);
  }
}

TEST_CASE("split partitions are disjoint, exhaustive and reproducible") {
  const auto ws = numbered(37);
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto a = split(ws, {0.7, 0.2, 0.1, seed});
    const auto b = split(ws, {0.7, 0.2, 0.1, seed});
    auto tr = origins(a.train), va = origins(a.val), te = origins(a.test);
    CHECK(tr.size() + va.size() + te.size() == ws.size());
    std::set<std::string> all = tr;
    all.insert(va.begin(), va.end());
    all.insert(te.begin(), te.end());
    CHECK(all.size() == ws.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].origin == b.train[i].origin);
    for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i].origin == b.test[i].origin);
  }
  CHECK_THROWS_AS(split(ws, {0.5, 0.2, 0.2, 0}), ArgumentError);
  CHECK_THROWS_AS(split(ws, {1.2, -0.1, -0.1, 0}), ArgumentError);
}

TEST_CASE("balanced_sample is exactly uniform") {
  auto ws = numbered(30);
  ws.erase(ws.begin(), ws.begin() + 10);  // walking now has 20
  const auto out = balanced_sample(ws, 20, 5);
  const auto h = class_histogram(out);
  for (auto n : h) CHECK(n == 20);
  CHECK(origins(out).size() == out.size());
  CHECK_THROWS_AS(balanced_sample(ws, 21, 5), ShortageError);
}

TEST_CASE("window invariants are checked on construction") {
  CHECK_THROWS_AS(make_window(Eigen::MatrixXd::Zero(99, 2), ActivityLabel::Walking, DomainTag::Source,
                              HeadMovement::None, ""),
                  ShapeError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(100, 2);
  bad(3, 0) = std::nan("");
  CHECK_THROWS_AS(make_window(bad, ActivityLabel::Walking, DomainTag::Source, HeadMovement::None, ""),
                  DataError);
  bad(3, 0) = -0.5;
  CHECK_THROWS_AS(make_window(bad, ActivityLabel::Walking, DomainTag::Source, HeadMovement::None, ""),
                  DataError);
}

TEST_CASE("harmonize_label maps corpus vocabularies") {
  CHECK(harmonize_label("wlk") == ActivityLabel::Walking);
  CHECK(harmonize_label("Walking_Upstairs") == ActivityLabel::Upstairs);
  CHECK(harmonize_label("stairsup") == ActivityLabel::Upstairs);
  CHECK(harmonize_label("stand") == ActivityLabel::Standing);
  CHECK(harmonize_label("jog") == ActivityLabel::Jogging);
  CHECK_FALSE(harmonize_label("sit").has_value());
  CHECK_FALSE(harmonize_label("stairsdown").has_value());
  CHECK_FALSE(harmonize_label("skydiving").has_value());
}

TEST_CASE("canonical CSV round trip and schema errors") {
  signal::RawRecording rec;
  for (int i = 0; i < 60; ++i) {
    rec.timestamps.push_back(i / 25.0);
    rec.accel.x.push_back(0.1 * i);
    rec.accel.y.push_back(1.0);
    rec.accel.z.push_back(-0.25);
    rec.gyro.x.push_back(0.01 * i);
    rec.gyro.y.push_back(0.0);
    rec.gyro.z.push_back(1.0 / 3.0);
    rec.activity.push_back(i < 30 ? std::optional(ActivityLabel::Jogging) : std::nullopt);
    rec.head_movement.push_back(HeadMovement::Yaw);
  }
  rec.rate_hz = 25.0;
  rec.accel_unit = AccelUnit::G;
  rec.location = SensorLocation::Head;
  const auto text = format_canonical(rec);
  const auto back = parse_canonical(text);
  CHECK(back.timestamps == rec.timestamps);
  CHECK(back.accel.x == rec.accel.x);
  CHECK(back.gyro.z == rec.gyro.z);
  CHECK(back.activity == rec.activity);
  CHECK(back.head_movement == rec.head_movement);
  CHECK(back.location == SensorLocation::Head);
  CHECK(back.accel_unit == AccelUnit::G);
  CHECK(back.rate_hz == doctest::Approx(25.0));
  CHECK(format_canonical(back) == text);

  CHECK_THROWS_AS(parse_canonical(""), SchemaError);
  CHECK_THROWS_AS(parse_canonical("t,ax,ay\n0,1,2\n"), SchemaError);
  std::string reversed = text;
  const auto second = reversed.find('\n', reversed.find('\n') + 1) + 1;
  reversed.replace(second, 1, "9");
  CHECK_THROWS_AS(parse_canonical(reversed), DataError);
  std::string bad_label = text;
  bad_label.replace(bad_label.find("jogging"), 7, "dancing");
  CHECK_THROWS_AS(parse_canonical(bad_label), LabelError);
}

TEST_CASE("window file round trip and corruption") {
  TempDir dir("winfile");
  const auto ws = earda::test::toy_windows(3, DomainTag::Target, 2);
  save_windows(ws, dir / "w.bin", {.filtered = true});
  WindowFileInfo info;
  const auto back = load_windows(dir / "w.bin", &info);
  CHECK(info.filtered);
  REQUIRE(back.size() == ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    CHECK(back[i].data == ws[i].data);
    CHECK(back[i].label == ws[i].label);
    CHECK(back[i].domain == ws[i].domain);
    CHECK(back[i].head == ws[i].head);
    CHECK(back[i].origin == ws[i].origin);
  }
  auto bytes = earda::test::read_text(dir / "w.bin");
  write_text(dir / "short.bin", bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_windows(dir / "short.bin"), CorruptionError);
  write_text(dir / "junk.bin", "hello world, not a window file");
  CHECK_THROWS_AS(load_windows(dir / "junk.bin"), CorruptionError);
  CHECK_THROWS_AS(load_windows(dir / "missing.bin"), IoError);
}

TEST_CASE("preprocess drops mixed windows and yields 4 s windows") {
  signal::RawRecording rec;
  const std::size_t n = 50 * 20;  // 20 s at 50 Hz
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 50.0;
    rec.timestamps.push_back(t);
    rec.accel.x.push_back(0.0);
    rec.accel.y.push_back(0.0);
    rec.accel.z.push_back(9.80665 + std::sin(2 * 3.14159 * 2 * t));
    rec.gyro.x.push_back(0.3);
    rec.gyro.y.push_back(0.4);
    rec.gyro.z.push_back(0.0);
    // 0-6 s walking, 6-20 s jogging: the 4-8 s window straddles both.
    rec.activity.push_back(t < 6.0 ? ActivityLabel::Walking : ActivityLabel::Jogging);
  }
  rec.rate_hz = 50.0;
  const auto ws = preprocess_recording(rec, PreprocessOptions{});
  REQUIRE(ws.size() == 4);
  CHECK(ws[0].label == ActivityLabel::Walking);
  for (std::size_t i = 1; i < ws.size(); ++i) CHECK(ws[i].label == ActivityLabel::Jogging);
  check_four_second_windows(ws);
  CHECK(ws[0].data.col(0).mean() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ws[0].data(50, 1) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("MotionSense layout") {
  TempDir dir("motionsense");
  std::ostringstream csv;
  csv << ",gravity.x,gravity.y,gravity.z,rotationRate.x,rotationRate.y,rotationRate.z,"
         "userAcceleration.x,userAcceleration.y,userAcceleration.z\n";
  for (int i = 0; i < 400; ++i) csv << i << ",0,0,1,0.1,0.2,0.2,0,0,0.1\n";
  write_text(dir / "A_DeviceMotion_data/wlk_7/sub_1.csv", csv.str());
  write_text(dir / "A_DeviceMotion_data/sit_5/sub_1.csv", csv.str());
  const auto recs = adapt_public(Corpus::MotionSense, dir.path);
  REQUIRE(recs.size() == 2);
  const auto ws = run_pipeline(recs);
  REQUIRE(ws.size() == 2);  // the sitting trial is out of scope
  for (const auto& w : ws) CHECK(w.label == ActivityLabel::Walking);
  check_four_second_windows(ws);
  CHECK(ws[0].data(50, 0) == doctest::Approx(1.1).epsilon(1e-6));
  CHECK(ws[0].data(50, 1) == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("HHAR layout") {
  TempDir dir("hhar");
  auto stream = [](double offset) {
    std::ostringstream csv;
    csv << "Index,Arrival_Time,Creation_Time,x,y,z,User,Model,Device,gt\n";
    for (int i = 0; i < 1200; ++i) {
      const long long t_ns = 1'000'000'000LL + static_cast<long long>(i) * 10'000'000LL;
      csv << i << ",0," << t_ns << ",0," << offset << ",0,a,nexus4,nexus4_1,"
          << (i < 450 ? "walk" : "stand") << "\n";
    }
    return csv.str();
  };
  write_text(dir / "Phones_accelerometer.csv", stream(9.80665));
  write_text(dir / "Phones_gyroscope.csv", stream(0.5));
  const auto recs = adapt_public(Corpus::HHAR, dir.path);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].rate_hz == doctest::Approx(100.0).epsilon(1e-3));
  const auto ws = run_pipeline(recs);
  REQUIRE(ws.size() == 2);  // 12 s; the middle window mixes both labels
  CHECK(ws[0].label == ActivityLabel::Walking);
  CHECK(ws[1].label == ActivityLabel::Standing);
  check_four_second_windows(ws);
  CHECK(ws[0].data(50, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("UCI HAR layout") {
  TempDir dir("ucihar");
  const auto signals = dir / "UCI HAR Dataset/train/Inertial Signals";
  auto matrix = [](double v) {
    std::ostringstream m;
    for (int w = 0; w < 8; ++w) {
      for (int i = 0; i < 128; ++i) m << ' ' << v;
      m << '\n';
    }
    return m.str();
  };
  for (const char* axis : {"x", "y", "z"}) {
    write_text(signals / (std::string("total_acc_") + axis + "_train.txt"),
               matrix(axis[0] == 'x' ? 1.0 : 0.0));
    write_text(signals / (std::string("body_gyro_") + axis + "_train.txt"),
               matrix(axis[0] == 'z' ? 0.25 : 0.0));
  }
  write_text(dir / "UCI HAR Dataset/train/y_train.txt", "1\n1\n1\n1\n1\n1\n1\n1\n");
  write_text(dir / "UCI HAR Dataset/train/subject_train.txt", "3\n3\n3\n3\n3\n3\n3\n3\n");
  const auto recs = adapt_public(Corpus::UCIHAR, dir.path);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].size() == 8 * 64);
  const auto ws = run_pipeline(recs);
  REQUIRE(ws.size() == 2);
  check_four_second_windows(ws);
  CHECK(ws[0].data(10, 1) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("Shoaib layout") {
  TempDir dir("shoaib");
  std::ostringstream csv;
  const char* block = "time_stamp,Ax,Ay,Az,Lx,Ly,Lz,Gx,Gy,Gz,Mx,My,Mz";
  csv << "Left_pocket,,,,,,,,,,,,,Wrist,,,,,,,,,,,,,\n";
  csv << block << ',' << block << ",Activity_Label\n";
  for (int i = 0; i < 500; ++i) {
    for (int b = 0; b < 2; ++b) csv << i << ",0,9.80665,0,0,0,0,0.6,0,0.8,1,1,1,";
    csv << "jogging\n";
  }
  write_text(dir / "Participant_1.csv", csv.str());
  const auto recs = adapt_public(Corpus::Shoaib, dir.path);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].location == SensorLocation::Pocket);
  CHECK(recs[1].location == SensorLocation::Wrist);
  const auto ws = run_pipeline(recs);
  REQUIRE(ws.size() == 4);
  for (const auto& w : ws) CHECK(w.label == ActivityLabel::Jogging);
  check_four_second_windows(ws);
  CHECK(ws[0].data(50, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("adapt_public rejects a malformed root") {
  TempDir dir("badcorpus");
  CHECK_THROWS_AS(adapt_public(Corpus::HHAR, dir.path), CorpusFormatError);
  CHECK_THROWS_AS(adapt_public(Corpus::UCIHAR, dir.path), CorpusFormatError);
  CHECK_THROWS_AS(adapt_public(Corpus::MotionSense, dir / "nope"), CorpusFormatError);
  write_text(dir / "A_DeviceMotion_data/wlk_1/sub_1.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(adapt_public(Corpus::MotionSense, dir.path), CorpusFormatError);
}

TEST_CASE("synthetic pack shape and determinism") {
  SynthConfig cfg;
  cfg.per_class = 10;
  const auto a = synth_generate(cfg, 4);
  const auto b = synth_generate(cfg, 4);
  REQUIRE(a.source.size() == 40);
  REQUIRE(a.target.size() == 40);
  for (auto n : class_histogram(a.target)) CHECK(n == 10);
  for (std::size_t i = 0; i < a.source.size(); ++i) CHECK(a.source[i].data == b.source[i].data);
  std::set<HeadMovement> heads;
  for (const auto& w : a.target) {
    CHECK(w.domain == DomainTag::Target);
    heads.insert(w.head);
  }
  CHECK(heads.size() == 5);
  for (const auto& w : a.source) CHECK(w.domain == DomainTag::Source);
  const auto c = synth_generate(cfg, 5);
  CHECK(c.source[0].data != a.source[0].data);
}

TEST_CASE("synthetic target carries stopband interference") {
  SynthConfig cfg;
  cfg.per_class = 10;
  const auto pack = synth_generate(cfg, 1);
  auto band_energy = [](const std::vector<LabeledWindow>& ws, ActivityLabel label) {
    double total = 0.0;
    for (const auto& w : ws) {
      if (w.label != label) continue;
      std::vector<double> x(w.data.col(0).data(), w.data.col(0).data() + w.data.rows());
      const auto s = signal::spectrum(x, kModelRateHz);
      for (std::size_t k = 0; k < s.freqs.size(); ++k)
        if (s.freqs[k] >= 6.0 && s.freqs[k] <= 10.0) total += s.magnitudes[k] * s.magnitudes[k];
    }
    return total;
  };
  const double src = band_energy(pack.source, ActivityLabel::Standing);
  const double tgt = band_energy(pack.target, ActivityLabel::Standing);
  CHECK(tgt > 10.0 * src);

  cfg.domain_shift = false;
  const auto flat = synth_generate(cfg, 1);
  CHECK(band_energy(flat.target, ActivityLabel::Standing) < 10.0 * band_energy(flat.source, ActivityLabel::Standing));
}
