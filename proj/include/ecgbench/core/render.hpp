#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ecgbench/core/record.hpp"

namespace ecgbench {

enum class ImageLayout { Grid3x4PlusRhythm, Stacked12 };

std::string_view layout_name(ImageLayout layout);
ImageLayout parse_layout(std::string_view name);

struct RenderOptions {
  double mm_per_s = 25.0;
  double mm_per_mv = 10.0;
  double px_per_mm = 4.0;
  double row_height_mm = 30.0;
  double margin_mm = 5.0;
};

struct RenderedImage {
  std::string svg;
  std::vector<std::uint8_t> png;
  double trace_width_mm = 0.0;  // width of one row of trace
  double page_width_mm = 0.0;
  double page_height_mm = 0.0;
};

/// 25 mm/s, 10 mm/mV scaling with a 1 mm / 5 mm background grid. Output bytes are a
/// pure function of (record, layout, options). Throws RenderError on empty records.
RenderedImage render_ecg_image(const EcgRecord& record, ImageLayout layout,
                               const RenderOptions& options = {});

}  // namespace ecgbench
