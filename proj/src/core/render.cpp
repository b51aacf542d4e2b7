#include "ecgbench/core/render.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "ecgbench/core/errors.hpp"

namespace ecgbench {

std::string_view layout_name(ImageLayout layout) {
  return layout == ImageLayout::Grid3x4PlusRhythm ? "grid-3x4-plus-rhythm" : "stacked-12";
}

ImageLayout parse_layout(std::string_view name) {
  if (name == "grid-3x4-plus-rhythm" || name == "grid") return ImageLayout::Grid3x4PlusRhythm;
  if (name == "stacked-12" || name == "stacked") return ImageLayout::Stacked12;
  throw RenderError("unknown layout '" + std::string(name) + "'");
}

namespace {

struct Panel {
  Lead lead;
  int row;
  double x0_mm;        // left edge of the panel on the page
  std::size_t first;   // sample range [first, last)
  std::size_t last;
};

std::vector<Panel> panels_for(const EcgRecord& rec, ImageLayout layout, double margin,
                              double trace_width) {
  std::vector<Panel> panels;
  const std::size_t n = rec.sample_count();
  if (layout == ImageLayout::Stacked12) {
    for (std::size_t i = 0; i < kLeadCount; ++i) {
      panels.push_back({kAllLeads[i], static_cast<int>(i), margin, 0, n});
    }
    return panels;
  }
  for (int col = 0; col < 4; ++col) {
    const std::size_t first = n * col / 4;
    const std::size_t last = n * (col + 1) / 4;
    for (int row = 0; row < 3; ++row) {
      panels.push_back({kAllLeads[col * 3 + row], row, margin + trace_width * col / 4.0, first,
                        last});
    }
  }
  panels.push_back({Lead::II, 3, margin, 0, n});
  return panels;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 255) {}

  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    auto* p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  void line(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> c) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  }

  std::vector<std::uint8_t> encode() const {
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw RenderError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw RenderError("PNG encoding failed");
    }
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t len) {
          auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
          v->insert(v->end(), data, data + len);
        },
        [](png_structp) {});
    png_set_IHDR(png, info, w_, h_, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    for (int y = 0; y < h_; ++y) {
      png_write_row(png, const_cast<png_bytep>(&px_[static_cast<std::size_t>(y) * w_ * 3]));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
  }

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

constexpr std::array<std::uint8_t, 3> kMinor{250, 215, 215};
constexpr std::array<std::uint8_t, 3> kMajor{235, 150, 150};
constexpr std::array<std::uint8_t, 3> kTrace{0, 0, 0};

}  // namespace

RenderedImage render_ecg_image(const EcgRecord& record, ImageLayout layout,
                               const RenderOptions& opt) {
  if (record.sample_count() == 0) throw RenderError("cannot render a zero-duration record");

  RenderedImage img;
  img.trace_width_mm = record.duration_s() * opt.mm_per_s;
  const int rows = layout == ImageLayout::Stacked12 ? 12 : 4;
  img.page_width_mm = img.trace_width_mm + 2 * opt.margin_mm;
  img.page_height_mm = rows * opt.row_height_mm + 2 * opt.margin_mm;
  const auto panels = panels_for(record, layout, opt.margin_mm, img.trace_width_mm);
  const double fs = record.sampling_rate();

  auto x_mm = [&](const Panel& p, std::size_t t) {
    return p.x0_mm + static_cast<double>(t - p.first) / fs * opt.mm_per_s;
  };
  auto y_mm = [&](const Panel& p, double mv) {
    return opt.margin_mm + (p.row + 0.5) * opt.row_height_mm - mv * opt.mm_per_mv;
  };

  // SVG in millimetre user units.
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(img.page_width_mm) +
         "mm\" height=\"" + fmt(img.page_height_mm) + "mm\" viewBox=\"0 0 " +
         fmt(img.page_width_mm) + " " + fmt(img.page_height_mm) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n<g id=\"grid\">\n";
  const int cols_mm = static_cast<int>(std::floor(img.page_width_mm));
  const int rows_mm = static_cast<int>(std::floor(img.page_height_mm));
  for (int i = 0; i <= cols_mm; ++i) {
    svg += "<line x1=\"" + fmt(i) + "\" y1=\"0\" x2=\"" + fmt(i) + "\" y2=\"" +
           fmt(img.page_height_mm) + "\" stroke=\"" + (i % 5 ? "#fad7d7" : "#eb9696") +
           "\" stroke-width=\"" + (i % 5 ? "0.05" : "0.15") + "\"/>\n";
  }
  for (int i = 0; i <= rows_mm; ++i) {
    svg += "<line x1=\"0\" y1=\"" + fmt(i) + "\" x2=\"" + fmt(img.page_width_mm) + "\" y2=\"" +
           fmt(i) + "\" stroke=\"" + (i % 5 ? "#fad7d7" : "#eb9696") + "\" stroke-width=\"" +
           (i % 5 ? "0.05" : "0.15") + "\"/>\n";
  }
  svg += "</g>\n<g id=\"traces\" fill=\"none\" stroke=\"#000000\" stroke-width=\"0.25\">\n";
  for (const auto& p : panels) {
    const auto data = record.lead(p.lead);
    svg += "<polyline data-lead=\"" + std::string(lead_name(p.lead)) + "\" points=\"";
    for (std::size_t t = p.first; t < p.last; ++t) {
      if (t != p.first) svg += ' ';
      svg += fmt(x_mm(p, t)) + "," + fmt(y_mm(p, data[t]));
    }
    svg += "\"/>\n";
  }
  svg += "</g>\n<g id=\"labels\" font-family=\"sans-serif\" font-size=\"3\">\n";
  for (const auto& p : panels) {
    svg += "<text x=\"" + fmt(p.x0_mm + 1) + "\" y=\"" +
           fmt(opt.margin_mm + p.row * opt.row_height_mm + 4) + "\">" +
           std::string(lead_name(p.lead)) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  img.svg = std::move(svg);

  // Raster copy.
  const double s = opt.px_per_mm;
  const int w = static_cast<int>(std::lround(img.page_width_mm * s));
  const int h = static_cast<int>(std::lround(img.page_height_mm * s));
  Canvas canvas(w, h);
  for (int pass = 0; pass < 2; ++pass) {  // major lines drawn over minor ones
    for (int i = 0; i <= cols_mm; ++i) {
      if ((i % 5 == 0) != (pass == 1)) continue;
      const int x = static_cast<int>(std::lround(i * s));
      canvas.line(x, 0, x, h - 1, pass ? kMajor : kMinor);
    }
    for (int i = 0; i <= rows_mm; ++i) {
      if ((i % 5 == 0) != (pass == 1)) continue;
      const int y = static_cast<int>(std::lround(i * s));
      canvas.line(0, y, w - 1, y, pass ? kMajor : kMinor);
    }
  }
  for (const auto& p : panels) {
    const auto data = record.lead(p.lead);
    int px = -1, py = -1;
    for (std::size_t t = p.first; t < p.last; ++t) {
      const int x = static_cast<int>(std::lround(x_mm(p, t) * s));
      const int y = static_cast<int>(std::lround(y_mm(p, data[t]) * s));
      if (px >= 0) canvas.line(px, py, x, y, kTrace);
      else canvas.set(x, y, kTrace);
      px = x;
      py = y;
    }
  }
  img.png = canvas.encode();
  return img;
}

}  // namespace ecgbench
