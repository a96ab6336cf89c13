#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "uiground/extract.hpp"
#include "uiground/imaging.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("uiground_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

inline uiground::UiElement button(const std::string& id, const uiground::BBox& b, std::string text = "Go") {
  uiground::UiElement e;
  e.id = id;
  e.tag = "button";
  e.text = std::move(text);
  e.bbox = b;
  e.visible = true;
  return e;
}

// n valid buttons laid out in rows of 10, 40x20 each with 4 px gaps.
inline uiground::PageSnapshot page_with_valid(std::size_t n, uiground::Viewport v = {1280, 800}) {
  uiground::PageSnapshot s;
  s.page_id = "page" + std::to_string(n);
  s.platform = uiground::Platform::Web;
  s.viewport = v;
  s.screenshot_ref = "screenshot.png";
  for (std::size_t i = 0; i < n; ++i) {
    const int col = static_cast<int>(i % 10);
    const int row = static_cast<int>(i / 10);
    s.elements.push_back(button("b" + std::to_string(i), {10 + col * 44, 10 + row * 24, 40, 20},
                                "Button " + std::to_string(i)));
  }
  return s;
}

// Deterministic non-uniform image so crops differ by position.
inline uiground::Image gradient(int w, int h) {
  uiground::Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, y, {static_cast<std::uint8_t>(x % 256), static_cast<std::uint8_t>(y % 256),
                     static_cast<std::uint8_t>((x + y) % 256)});
    }
  }
  return img;
}

}  // namespace fixtures
