#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wsseg/phantom.hpp"

using namespace wsseg;

namespace {

PhantomSpec small_spec() {
  PhantomSpec s;
  s.dims = {30, 48, 48};
  s.r_screw = 5;
  s.r_corrosion = 10;
  s.r_bone = 20;
  return s;
}

}  // namespace

TEST_CASE("noise-free phantom geometry") {
  PhantomSpec spec;
  spec.dims = {3, 97, 97};
  spec.noise_sigma = 0.0;
  const auto ph = generate_phantom(spec);
  for (std::size_t z = 0; z < 3; ++z) {
    CHECK(ph.labels.at(z, 48, 48) == kScrew);
    CHECK(ph.gray.at(z, 48, 48) == static_cast<float>(spec.gray_means[kScrew]));
    CHECK(ph.labels.at(z, 0, 0) == kBackground);
    CHECK(ph.gray.at(z, 0, 0) == static_cast<float>(spec.gray_means[kBackground]));
  }
  for (std::size_t y = 0; y < 97; ++y)
    for (std::size_t x = 0; x < 97; ++x) {
      const double r = std::hypot(double(y) - 48.0, double(x) - 48.0);
      const auto lab = ph.labels.at(1, y, x);
      if (r > spec.r_bone) CHECK(lab == kBackground);
      CHECK(lab == phantom_label_at_radius(spec, r));
      CHECK(ph.gray.at(1, y, x) == static_cast<float>(spec.gray_means[lab]));
    }
}

TEST_CASE("label areas match analytic disk and annulus areas on 256x256 planes") {
  PhantomSpec spec;
  spec.dims = {1, 256, 256};
  spec.r_screw = 30;
  spec.r_corrosion = 60;
  spec.r_bone = 110;
  const auto ph = generate_phantom(spec);
  std::array<double, kNumClasses> count{};
  for (auto v : ph.labels.data()) count[v] += 1.0;
  const double pi = std::numbers::pi;
  const double screw = pi * 30 * 30;
  const double corroded = pi * 60 * 60 - screw;
  const double bone = pi * 110 * 110 - pi * 60 * 60;
  const double background = 256.0 * 256.0 - pi * 110 * 110;
  CHECK(std::abs(count[kScrew] - screw) <= 0.02 * screw);
  CHECK(std::abs(count[kCorrodedScrew] - corroded) <= 0.02 * corroded);
  CHECK(std::abs(count[kBone] - bone) <= 0.02 * bone);
  CHECK(std::abs(count[kBackground] - background) <= 0.02 * background);
}

TEST_CASE("noise statistics and clamping") {
  PhantomSpec spec = small_spec();
  spec.noise_sigma = 0.05;
  const auto ph = generate_phantom(spec);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ph.gray.data().size(); ++i) {
    const float g = ph.gray.data()[i];
    CHECK((g >= 0.0f && g <= 1.0f));
    if (ph.labels.data()[i] == kBone) {
      const double e = g - spec.gray_means[kBone];
      sum += e;
      sq += e * e;
      ++n;
    }
  }
  CHECK(std::abs(sum / n) < 0.005);
  CHECK(std::sqrt(sq / n) == doctest::Approx(0.05).epsilon(0.05));

  spec.noise_sigma = 0.5;
  const auto loud = generate_phantom(spec);
  for (float g : loud.gray.data()) CHECK((g >= 0.0f && g <= 1.0f));
}

TEST_CASE("determinism and seed independence of the label geometry") {
  auto spec = small_spec();
  spec.bone_hole_count = 3;
  const auto a = generate_phantom(spec);
  const auto b = generate_phantom(spec);
  CHECK(a.gray == b.gray);
  CHECK(a.labels == b.labels);

  spec.rng_seed = 17;
  const auto c = generate_phantom(spec);
  CHECK(c.labels == a.labels);
  CHECK(c.gray != a.gray);
}

TEST_CASE("bone holes change gray values only inside bone") {
  auto spec = small_spec();
  spec.noise_sigma = 0.0;
  const auto plain = generate_phantom(spec);
  spec.bone_hole_count = 4;
  spec.hole_radius = 2.5;
  const auto holed = generate_phantom(spec);
  CHECK(holed.labels == plain.labels);
  for (std::size_t z = 0; z < spec.dims.nz; ++z) {
    std::size_t changed = 0;
    for (std::size_t i = 0; i < spec.dims.plane_size(); ++i) {
      const float g0 = plain.gray.plane(z)[i];
      const float g1 = holed.gray.plane(z)[i];
      if (g0 != g1) {
        ++changed;
        CHECK(plain.labels.plane(z)[i] == kBone);
        CHECK(g1 == static_cast<float>(spec.gray_means[kBackground]));
      }
    }
    CHECK(changed > 0);
  }
}

TEST_CASE("invalid phantom specs") {
  auto bad = [](auto edit) {
    auto s = small_spec();
    edit(s);
    return s;
  };
  CHECK_THROWS_AS(generate_phantom(bad([](PhantomSpec& s) { s.r_screw = 0; })), ConfigError);
  CHECK_THROWS_AS(generate_phantom(bad([](PhantomSpec& s) { s.r_corrosion = s.r_screw; })), ConfigError);
  CHECK_THROWS_AS(generate_phantom(bad([](PhantomSpec& s) { s.r_bone = 25; })), ConfigError);
  CHECK_THROWS_AS(generate_phantom(bad([](PhantomSpec& s) { s.gray_means[2] = s.gray_means[1]; })), ConfigError);
  CHECK_THROWS_AS(generate_phantom(bad([](PhantomSpec& s) { s.gray_means[0] = 1.5; })), ConfigError);
  CHECK_THROWS_AS(generate_phantom(bad([](PhantomSpec& s) { s.noise_sigma = -0.1; })), ConfigError);
  CHECK_THROWS_AS(generate_phantom(bad([](PhantomSpec& s) { s.dims.nx = 0; })), ShapeError);
  CHECK_NOTHROW(generate_phantom(bad([](PhantomSpec& s) { s.r_bone = 24; })));
}

TEST_CASE("generated scribbles") {
  const auto ph = generate_phantom(small_spec());
  ScribbleOptions opts;
  opts.strokes_per_label = 3;
  opts.stroke_len = 12;
  const auto gen = generate_scribbles(ph.labels, opts);

  CHECK(gen.scribbles.annotated_planes() == std::vector<std::size_t>{0, 10, 20});
  CHECK(gen.warnings.empty());
  for (const auto& s : gen.scribbles.records()) CHECK(ph.labels.at(s.z, s.y, s.x) == s.label);
  for (std::size_t z : {0, 10, 20}) {
    std::array<std::size_t, kNumClasses> per{};
    for (const auto& s : gen.scribbles.on_plane(z)) ++per[s.label];
    for (auto n : per) {
      CHECK(n >= 1);
      CHECK(n <= opts.strokes_per_label * opts.stroke_len);
    }
  }
  CHECK(gen.coverage == doctest::Approx(double(gen.scribbles.size()) / (3.0 * 48 * 48)));
  CHECK(gen.coverage == scribble_coverage(gen.scribbles, ph.labels.dims()));

  CHECK(generate_scribbles(ph.labels, opts).scribbles == gen.scribbles);
  opts.rng_seed = 5;
  CHECK(generate_scribbles(ph.labels, opts).scribbles != gen.scribbles);

  // Each stroke is 4-connected: every record has a same-label scribble neighbour
  // unless its stroke has length one.
  opts.strokes_per_label = 1;
  opts.stroke_len = 30;
  opts.persistence = 0.9;
  const auto one = generate_scribbles(ph.labels, opts);
  for (const auto& s : one.scribbles.records()) {
    bool joined = false;
    for (const auto& t : one.scribbles.on_plane(s.z))
      if (t.label == s.label && (std::abs(long(t.y) - long(s.y)) + std::abs(long(t.x) - long(s.x))) == 1) joined = true;
    CHECK(joined);
  }

  opts.persistence = 1.5;
  CHECK_THROWS_AS(generate_scribbles(ph.labels, opts), ConfigError);
}

TEST_CASE("scribble coverage grows with the stroke budget") {
  const auto ph = generate_phantom(small_spec());
  ScribbleOptions few, many;
  few.strokes_per_label = 2;
  few.stroke_len = 5;
  many.strokes_per_label = 8;
  many.stroke_len = 20;
  CHECK(generate_scribbles(ph.labels, few).coverage < generate_scribbles(ph.labels, many).coverage);
  ScribbleOptions none;
  none.strokes_per_label = 0;
  const auto empty = generate_scribbles(ph.labels, none);
  CHECK(empty.scribbles.empty());
  CHECK(empty.coverage == 0.0);
}

TEST_CASE("absent labels are skipped with a warning") {
  LabelVolume labels(Dims{1, 4, 4}, ValueKind::Label, kBackground);
  labels.at(0, 1, 1) = kBone;
  const auto gen = generate_scribbles(labels, ScribbleOptions{});
  CHECK(gen.warnings.size() == 2);
  for (const auto& s : gen.scribbles.records()) CHECK((s.label == kBackground || s.label == kBone));

  labels.at(0, 2, 2) = kUnlabeled;
  CHECK_THROWS_AS(generate_scribbles(labels, ScribbleOptions{}), ConfigError);
  ScribbleOptions zero;
  zero.z_stride = 0;
  CHECK_THROWS_AS(generate_scribbles(LabelVolume(Dims{1, 2, 2}, ValueKind::Label, 0), zero), ConfigError);
}
