#include <set>

#include "doctest.h"
#include "uiground/digest.hpp"
#include "uiground/random.hpp"

using namespace uiground;

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update("a");
  h.update("bc");
  CHECK(h.hex() == sha256_hex("abc"));
}

TEST_CASE("length-prefixed fields do not collide") {
  Sha256 a;
  a.update_field("ab");
  a.update_field("c");
  Sha256 b;
  b.update_field("a");
  b.update_field("bc");
  CHECK(a.hex() != b.hex());
}

TEST_CASE("base64") {
  const std::string s = "hello";
  const std::vector<std::uint8_t> bytes(s.begin(), s.end());
  CHECK(base64_encode(bytes) == "aGVsbG8=");
  CHECK(base64_encode({}) == "");
}

TEST_CASE("named substreams are reproducible and distinct") {
  Rng a = Rng::substream(42, "x");
  Rng b = Rng::substream(42, "x");
  Rng c = Rng::substream(42, "y");
  Rng d = Rng::substream(43, "x");
  const auto va = a.next();
  CHECK(va == b.next());
  CHECK(va != c.next());
  CHECK(va != d.next());
}

TEST_CASE("below stays in range and covers it") {
  Rng r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  for (int i = 0; i < 100; ++i) {
    const auto v = r.between(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
    const double u = r.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sample_without_replacement draws distinct indices") {
  Rng r(5);
  const auto s = r.sample_without_replacement(100, 30);
  CHECK(s.size() == 30);
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 30);
  for (auto i : s) CHECK(i < 100);
  CHECK(r.sample_without_replacement(5, 5).size() == 5);
  CHECK(r.sample_without_replacement(5, 0).empty());
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  std::vector<int> a(50);
  for (int i = 0; i < 50; ++i) a[i] = i;
  auto b = a;
  Rng r1(9);
  Rng r2(9);
  r1.shuffle(a);
  r2.shuffle(b);
  CHECK(a == b);
  std::sort(b.begin(), b.end());
  for (int i = 0; i < 50; ++i) CHECK(b[i] == i);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
