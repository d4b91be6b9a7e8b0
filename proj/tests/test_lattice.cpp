#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "feasplan/lattice.hpp"

using namespace feasplan;

namespace {

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

const ControlSet& reference_set() {
  static const ControlSet cs = generate_minimal_control_set(0.05, 1.0, 16);
  return cs;
}

}  // namespace

TEST(Headings, SixteenUsesCellCenterAngles) {
  const auto h = derive_headings(16);
  ASSERT_EQ(h.size(), 16u);
  EXPECT_DOUBLE_EQ(h[0], 0.0);
  EXPECT_NEAR(h[1], std::atan2(1.0, 2.0), 1e-15);
  EXPECT_NEAR(h[1] * 180.0 / kPi, 26.565051177, 1e-8);
  EXPECT_NEAR(h[2], kPi / 4.0, 1e-15);
  EXPECT_NEAR(h[3], std::atan2(2.0, 1.0), 1e-15);
  EXPECT_NEAR(h[4], kPi / 2.0, 1e-15);
  for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LT(h[k - 1], h[k]);
}

TEST(Headings, AxesAndMultiplesOfEight) {
  EXPECT_EQ(derive_headings(4), (std::vector<double>{0.0, kPi / 2.0, kPi, 3.0 * kPi / 2.0}));
  const auto h8 = derive_headings(8);
  ASSERT_EQ(h8.size(), 8u);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(h8[k], k * kPi / 4.0, 1e-12);
  EXPECT_EQ(derive_headings(24).size(), 24u);
  EXPECT_THROW(derive_headings(12), InvalidArgument);
  EXPECT_THROW(derive_headings(6), InvalidArgument);
}

TEST(ControlSetGenerator, ReferenceSetHasThreeToFivePerHeading) {
  const auto t0 = std::chrono::steady_clock::now();
  ControlSetReport rep;
  const auto cs = generate_minimal_control_set(0.05, 1.0, 16, {}, &rep);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 300.0);
  const auto groups = cs.by_start_heading();
  for (int h = 0; h < 16; ++h) {
    EXPECT_GE(groups[h].size(), 3u) << "heading " << h;
    EXPECT_LE(groups[h].size(), 5u) << "heading " << h;
  }
  EXPECT_NO_THROW(validate_control_set(cs));
  EXPECT_GE(rep.rings_explored, rep.first_counted_ring + 2);
}

TEST(ControlSetGenerator, PrimitivesRespectTheTurningRadius) {
  const auto& cs = reference_set();
  for (const auto& p : cs.primitives) {
    EXPECT_LE(max_discrete_curvature(p.poses), 1.0 / cs.turning_radius + 1e-6) << "primitive " << p.id;
    EXPECT_LE(max_spacing(p.poses), cs.resolution + 1e-9);
    EXPECT_FALSE(p.reversed);
  }
}

TEST(ControlSetGenerator, DiagonalStepPresentAndStraightDoublingAbsent) {
  const auto& cs = reference_set();
  bool diagonal = false;
  for (const auto& p : cs.primitives) {
    const auto [dx, dy] = primitive_end_cell(p, cs.resolution);
    if (p.start_heading_bin == 2 && p.end_heading_bin == 2 && dx == 1 && dy == 1) diagonal = true;
    if (p.start_heading_bin == 0 && p.end_heading_bin == 0) {
      EXPECT_EQ(dx, 1);
      EXPECT_EQ(dy, 0);
    }
  }
  EXPECT_TRUE(diagonal);
}

TEST(ControlSetGenerator, CompleteAtHorizonAndMinimal) {
  ControlSetReport rep;
  const auto cs = generate_minimal_control_set(0.05, 1.0, 16, {}, &rep);
  const auto gaps = completeness_gaps(cs, rep.rings_explored);
  EXPECT_TRUE(gaps.empty()) << gaps.size() << " uncovered poses";
  EXPECT_TRUE(redundant_primitives(cs).empty());

  // Removing any one primitive leaves some pose uncovered.
  for (std::size_t k = 0; k < cs.primitives.size(); ++k) {
    ControlSet reduced = cs;
    reduced.primitives.erase(reduced.primitives.begin() + static_cast<std::ptrdiff_t>(k));
    EXPECT_FALSE(completeness_gaps(reduced, rep.rings_explored).empty()) << "primitive " << k << " is redundant";
  }
}

TEST(ControlSetGenerator, ClosedUnderGridSymmetries) {
  const auto& cs = reference_set();
  for (const auto& p : cs.primitives) {
    for (const auto& s : lattice_detail::grid_symmetries()) {
      const auto q = lattice_detail::transform_primitive(p, s, cs.headings);
      const bool found = std::any_of(cs.primitives.begin(), cs.primitives.end(), [&](const MotionPrimitive& a) {
        return lattice_detail::same_motion(a, q, cs.resolution);
      });
      EXPECT_TRUE(found) << "image of primitive " << p.id;
    }
  }
}

TEST(ControlSetGenerator, FiltersAndPruningDoNotChangeReferenceSet) {
  const auto& cs = reference_set();
  ControlSetOptions o;
  o.bearing_filter = false;
  EXPECT_EQ(generate_minimal_control_set(0.05, 1.0, 16, o), cs);
  o = {};
  o.prune = false;
  EXPECT_EQ(generate_minimal_control_set(0.05, 1.0, 16, o), cs);
}

TEST(ControlSetGenerator, SmallerRadiusGivesShorterTurns) {
  const auto small = generate_minimal_control_set(0.05, 0.4, 16);
  EXPECT_NO_THROW(validate_control_set(small));
  double longest_small = 0.0, longest_ref = 0.0;
  for (const auto& p : small.primitives) {
    longest_small = std::max(longest_small, p.length);
    EXPECT_LE(max_discrete_curvature(p.poses), 1.0 / 0.4 + 1e-6);
  }
  for (const auto& p : reference_set().primitives) longest_ref = std::max(longest_ref, p.length);
  EXPECT_LT(longest_small, longest_ref);
}

TEST(ControlSetGenerator, RingLimitIsAnError) {
  ControlSetOptions o;
  o.max_ring = 5;
  EXPECT_THROW(generate_minimal_control_set(0.05, 1.0, 16, o), Error);
  EXPECT_THROW(generate_minimal_control_set(0.0, 1.0, 16), InvalidArgument);
  EXPECT_THROW(generate_minimal_control_set(0.05, 1.0, 12), InvalidArgument);
  EXPECT_EQ(default_max_ring(0.05, 1.0), 48);
}

// ---------------------------------------------------------------------------

TEST(ControlSetFile, RoundTrip) {
  const auto& cs = reference_set();
  const auto path = temp_file("feasplan_cs_roundtrip.txt");
  save_control_set(cs, path);
  const auto back = load_control_set(path);
  ASSERT_EQ(back.primitives.size(), cs.primitives.size());
  EXPECT_EQ(back.headings, cs.headings);
  for (std::size_t k = 0; k < cs.primitives.size(); ++k) {
    const auto& a = cs.primitives[k];
    const auto& b = back.primitives[k];
    EXPECT_EQ(a.start_heading_bin, b.start_heading_bin);
    EXPECT_EQ(a.end_heading_bin, b.end_heading_bin);
    ASSERT_EQ(a.poses.size(), b.poses.size());
    for (std::size_t q = 0; q < a.poses.size(); ++q) {
      EXPECT_NEAR(a.poses[q].x, b.poses[q].x, 1e-9);
      EXPECT_NEAR(a.poses[q].y, b.poses[q].y, 1e-9);
      EXPECT_NEAR(a.poses[q].theta, b.poses[q].theta, 1e-9);
    }
  }
  EXPECT_EQ(back, cs);
  std::filesystem::remove(path);
}

TEST(ControlSetFile, MatchesCommittedGoldenFiles) {
  const std::filesystem::path data(FEASPLAN_TEST_DATA);
  EXPECT_EQ(load_control_set(data / "control_set_r1.0_res0.05_16.txt"), reference_set());
  EXPECT_EQ(load_control_set(data / "control_set_r0.4_res0.05_16.txt"), generate_minimal_control_set(0.05, 0.4, 16));
}

TEST(ControlSetFile, ErrorsAreDistinct) {
  const auto good = temp_file("feasplan_cs_good.txt");
  save_control_set(reference_set(), good);
  const std::string text = read_all(good);
  const auto bad = temp_file("feasplan_cs_bad.txt");

  write_all(bad, text.substr(0, text.size() / 2));
  EXPECT_THROW(load_control_set(bad), ControlSetFormatError);

  std::string wrong_version = text;
  wrong_version.replace(0, wrong_version.find('\n'), "feasplan-control-set 2");
  write_all(bad, wrong_version);
  EXPECT_THROW(load_control_set(bad), ControlSetVersionError);

  // Nudge the end of the first primitive off its cell center.
  const ControlSet& cs = reference_set();
  ControlSet shifted = cs;
  shifted.primitives[0].poses.back().x += 0.01;
  save_control_set(shifted, bad);
  EXPECT_THROW(load_control_set(bad), ControlSetInvariantError);

  write_all(bad, "hello world\n");
  EXPECT_THROW(load_control_set(bad), ControlSetFormatError);
  write_all(bad, "");
  EXPECT_THROW(load_control_set(bad), ControlSetFormatError);
  EXPECT_THROW(load_control_set(temp_file("feasplan_cs_missing.txt")), ControlSetFormatError);

  std::string bad_number = text;
  bad_number.replace(bad_number.find("heading_bins 16"), 15, "heading_bins x");
  write_all(bad, bad_number);
  EXPECT_THROW(load_control_set(bad), ControlSetFormatError);

  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}

TEST(ControlSetFile, ReversePrimitivesAreValid) {
  const auto& cs = reference_set();
  ControlSet with_rev = cs;
  const auto rev = reverse_primitives(cs);
  ASSERT_EQ(rev.size(), cs.primitives.size());
  for (std::size_t k = 0; k < rev.size(); ++k) {
    EXPECT_TRUE(rev[k].reversed);
    EXPECT_EQ(rev[k].start_heading_bin, (cs.primitives[k].start_heading_bin + 8) % 16);
    // Positions are unchanged; the vehicle faces the other way.
    EXPECT_NEAR(rev[k].poses.back().x, cs.primitives[k].poses.back().x, 1e-12);
  }
  with_rev.primitives.insert(with_rev.primitives.end(), rev.begin(), rev.end());
  EXPECT_NO_THROW(validate_control_set(with_rev));
}
