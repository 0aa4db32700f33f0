#ifndef ECGD_SERIALIZE_HPP
#define ECGD_SERIALIZE_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ecgd/pipeline.hpp"
#include "ecgd/synth.hpp"

namespace ecgd {

using Json = nlohmann::ordered_json;

inline constexpr int kManifestSchemaVersion = 1;

/// Fixed-point decimal text; "-0.000000" is written as "0.000000".
inline std::string format_fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline double round_to(double v, int decimals = 6) {
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

inline std::string signal_csv(const Signal& s) {
  std::string out = "t_ms,v_mv\n";
  out.reserve(out.size() + s.t_ms.size() * 24);
  for (std::size_t i = 0; i < s.t_ms.size(); ++i) {
    out += format_fixed(s.t_ms[i]);
    out += ',';
    out += format_fixed(s.v_mv[i]);
    out += '\n';
  }
  return out;
}

inline Json signal_json(const LeadResult& lead) {
  Json t = Json::array();
  Json v = Json::array();
  for (double x : lead.signal.t_ms) t.push_back(round_to(x));
  for (double x : lead.signal.v_mv) v.push_back(round_to(x));
  return Json{{"lead", lead.name}, {"index", lead.index}, {"t_ms", std::move(t)}, {"v_mv", std::move(v)}};
}

inline std::string blob_table_csv(const std::vector<Blob>& blobs) {
  std::string out = "label,area,width,height,aspect_ratio,centroid_row,centroid_col\n";
  for (const Blob& b : blobs) {
    out += std::to_string(b.label) + ',' + std::to_string(b.area) + ',' + std::to_string(b.width()) + ',' +
           std::to_string(b.height()) + ',' + format_fixed(b.aspect_ratio()) + ',' + format_fixed(b.centroid_row) +
           ',' + format_fixed(b.centroid_col) + '\n';
  }
  return out;
}

/**
 * Per-input manifest. `files` holds the signal file name of every lead in
 * lead order. No timestamps, so identical runs give identical bytes.
 */
inline Json manifest_json(const DigitizeResult& res, const std::string& input, const std::string& format,
                          const std::vector<std::string>& files) {
  Json leads = Json::array();
  for (std::size_t i = 0; i < res.leads.size(); ++i) {
    const LeadResult& l = res.leads[i];
    leads.push_back({{"index", l.index},
                     {"name", l.name},
                     {"file", i < files.size() ? files[i] : std::string()},
                     {"stripe", {{"row_start", l.stripe.row_start}, {"row_end", l.stripe.row_end}}},
                     {"roi", {{"col_start", l.roi.col_start}, {"col_end", l.roi.col_end}}},
                     {"trace", {{"col_start", l.trace_bounds.col_start}, {"col_end", l.trace_bounds.col_end}}},
                     {"samples", l.signal.t_ms.size()},
                     {"missing_columns", l.missing_columns}});
  }
  Json m{{"schema_version", kManifestSchemaVersion},
         {"input", input},
         {"image", {{"width", res.width}, {"height", res.height}}},
         {"px_per_mm", round_to(res.px_per_mm)},
         {"px_per_mm_source", res.px_per_mm_source}};
  if (res.grid) {
    m["grid"] = {{"h_pitch_px", round_to(res.grid->h_pitch_px)},
                 {"v_pitch_px", round_to(res.grid->v_pitch_px)},
                 {"vertical_lines", res.grid->n_lines_h},
                 {"horizontal_lines", res.grid->n_lines_v}};
  }
  m["calibration"] = {{"mv_per_mm", res.calibration.mv_per_mm}, {"ms_per_mm", res.calibration.ms_per_mm}};
  m["format"] = format;
  m["leads"] = std::move(leads);
  m["warnings"] = res.warnings;
  return m;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes next to the target and renames over it, so readers never see a
/// partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::io, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::io, "cannot rename onto " + path.string());
  }
}

// --- sheet specs --------------------------------------------------------------

namespace json_detail {

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::invalid_argument, "sheet spec: " + where + ": " + what);
}

inline void only_keys(const Json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : allowed) known = known || item.key() == k;
    if (!known) bad(where, "unknown key '" + item.key() + "'");
  }
}

inline double number(const Json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(where, "expected a finite number");
  return d;
}

inline int integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where, "expected an integer");
  return v.get<int>();
}

inline Rgb color(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) bad(where, "expected [r, g, b]");
  std::uint8_t ch[3];
  for (std::size_t i = 0; i < 3; ++i) {
    const int c = integer(v[i], where);
    if (c < 0 || c > 255) bad(where, "channel outside 0..255");
    ch[i] = static_cast<std::uint8_t>(c);
  }
  return {ch[0], ch[1], ch[2]};
}

template <class T, class Read>
void maybe(const Json& obj, const char* key, T& dst, const std::string& where, Read read) {
  if (obj.contains(key)) dst = read(obj.at(key), where + "." + key);
}

inline SignalRecipe recipe(const Json& j, const std::string& where) {
  only_keys(j, where, {"duration_ms", "ms_per_sample", "components", "qrs"});
  SignalRecipe r;
  maybe(j, "duration_ms", r.duration_ms, where, number);
  maybe(j, "ms_per_sample", r.ms_per_sample, where, number);
  if (j.contains("components")) {
    const Json& comps = j.at("components");
    if (!comps.is_array()) bad(where + ".components", "expected an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string w = where + ".components[" + std::to_string(i) + "]";
      only_keys(comps[i], w, {"freq_hz", "amp_mv", "phase_rad"});
      Sinusoid s;
      maybe(comps[i], "freq_hz", s.freq_hz, w, number);
      maybe(comps[i], "amp_mv", s.amp_mv, w, number);
      maybe(comps[i], "phase_rad", s.phase_rad, w, number);
      r.components.push_back(s);
    }
  }
  if (j.contains("qrs")) {
    const std::string w = where + ".qrs";
    const Json& q = j.at("qrs");
    only_keys(q, w, {"rate_bpm", "amp_mv", "sigma_ms", "first_ms"});
    QrsTrain t;
    maybe(q, "rate_bpm", t.rate_bpm, w, number);
    maybe(q, "amp_mv", t.amp_mv, w, number);
    maybe(q, "sigma_ms", t.sigma_ms, w, number);
    maybe(q, "first_ms", t.first_ms, w, number);
    r.qrs = t;
  }
  if (!(r.duration_ms > 0) || !(r.ms_per_sample > 0)) bad(where, "duration and sample period must be positive");
  return r;
}

inline LeadSpec lead(const Json& j, const std::string& where) {
  only_keys(j, where, {"name", "samples_mv", "ms_per_sample", "recipe"});
  LeadSpec l;
  if (!j.contains("name") || !j.at("name").is_string()) bad(where, "lead needs a string 'name'");
  l.name = j.at("name").get<std::string>();
  const bool has_samples = j.contains("samples_mv");
  if (has_samples == j.contains("recipe")) bad(where, "give exactly one of 'samples_mv' and 'recipe'");
  if (has_samples) {
    const Json& s = j.at("samples_mv");
    if (!s.is_array()) bad(where + ".samples_mv", "expected an array");
    for (const auto& v : s) l.samples_mv.push_back(number(v, where + ".samples_mv"));
    maybe(j, "ms_per_sample", l.ms_per_sample, where, number);
  } else {
    if (j.contains("ms_per_sample")) bad(where, "'ms_per_sample' belongs inside 'recipe'");
    const SignalRecipe r = recipe(j.at("recipe"), where + ".recipe");
    l.samples_mv = generate_signal(r);
    l.ms_per_sample = r.ms_per_sample;
  }
  return l;
}

inline Json color_json(Rgb c) { return Json::array({c.r, c.g, c.b}); }

}  // namespace json_detail

/**
 * Sheet spec from JSON. Every field is optional except `leads`; each lead
 * carries either raw `samples_mv` or a `recipe` of sinusoids plus an
 * optional Gaussian beat train. Unknown keys are rejected.
 */
inline SheetSpec sheet_spec_from_json(const Json& j) {
  using namespace json_detail;
  only_keys(j, "spec",
            {"px_per_mm", "grid_color", "grid_heavy_every", "grid_heavy_color", "paper_color", "ink_color",
             "stroke_width_px", "leads", "stripe_height_mm", "label_glyphs", "glyph_layout", "mv_per_mm",
             "ms_per_mm", "margin_x_mm", "margin_y_mm", "baseline_fraction", "glyph_height_mm", "glyph_offset_mm"});
  SheetSpec s;
  const std::string w = "spec";
  maybe(j, "px_per_mm", s.px_per_mm, w, number);
  maybe(j, "grid_color", s.grid_color, w, color);
  maybe(j, "grid_heavy_every", s.grid_heavy_every, w, integer);
  maybe(j, "grid_heavy_color", s.grid_heavy_color, w, color);
  maybe(j, "paper_color", s.paper_color, w, color);
  maybe(j, "ink_color", s.ink_color, w, color);
  maybe(j, "stroke_width_px", s.stroke_width_px, w, integer);
  maybe(j, "stripe_height_mm", s.stripe_height_mm, w, number);
  maybe(j, "mv_per_mm", s.mv_per_mm, w, number);
  maybe(j, "ms_per_mm", s.ms_per_mm, w, number);
  maybe(j, "margin_x_mm", s.margin_x_mm, w, number);
  maybe(j, "margin_y_mm", s.margin_y_mm, w, number);
  maybe(j, "baseline_fraction", s.baseline_fraction, w, number);
  maybe(j, "glyph_height_mm", s.glyph_height_mm, w, number);
  maybe(j, "glyph_offset_mm", s.glyph_offset_mm, w, number);
  if (j.contains("label_glyphs")) {
    if (!j.at("label_glyphs").is_boolean()) bad("spec.label_glyphs", "expected true or false");
    s.label_glyphs = j.at("label_glyphs").get<bool>();
  }
  if (j.contains("glyph_layout")) {
    const Json& g = j.at("glyph_layout");
    if (g == "below") {
      s.glyph_layout = GlyphLayout::below;
    } else if (g == "left") {
      s.glyph_layout = GlyphLayout::left;
    } else {
      bad("spec.glyph_layout", "expected \"below\" or \"left\"");
    }
  }
  if (!j.contains("leads") || !j.at("leads").is_array()) bad("spec", "'leads' array is required");
  const Json& leads = j.at("leads");
  for (std::size_t i = 0; i < leads.size(); ++i) {
    s.leads.push_back(lead(leads[i], "spec.leads[" + std::to_string(i) + "]"));
  }
  s.validate();
  return s;
}

inline SheetSpec load_sheet_spec(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
  }
  try {
    return sheet_spec_from_json(j);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

/// Spec with every lead expanded to raw samples; reads back to an equal spec.
inline Json sheet_spec_to_json(const SheetSpec& s) {
  using json_detail::color_json;
  Json leads = Json::array();
  for (const auto& l : s.leads) {
    leads.push_back({{"name", l.name}, {"samples_mv", l.samples_mv}, {"ms_per_sample", l.ms_per_sample}});
  }
  return Json{{"px_per_mm", s.px_per_mm},
              {"grid_color", color_json(s.grid_color)},
              {"grid_heavy_every", s.grid_heavy_every},
              {"grid_heavy_color", color_json(s.grid_heavy_color)},
              {"paper_color", color_json(s.paper_color)},
              {"ink_color", color_json(s.ink_color)},
              {"stroke_width_px", s.stroke_width_px},
              {"stripe_height_mm", s.stripe_height_mm},
              {"label_glyphs", s.label_glyphs},
              {"glyph_layout", s.glyph_layout == GlyphLayout::left ? "left" : "below"},
              {"mv_per_mm", s.mv_per_mm},
              {"ms_per_mm", s.ms_per_mm},
              {"margin_x_mm", s.margin_x_mm},
              {"margin_y_mm", s.margin_y_mm},
              {"baseline_fraction", s.baseline_fraction},
              {"glyph_height_mm", s.glyph_height_mm},
              {"glyph_offset_mm", s.glyph_offset_mm},
              {"leads", std::move(leads)}};
}

/// Ground truth of a rendered sheet. Centerline rows are page rows.
inline Json ground_truth_json(const GroundTruth& gt, std::size_t width, std::size_t height) {
  Json leads = Json::array();
  for (const auto& l : gt.leads) {
    Json lead{{"name", l.name},
              {"slot", {{"row_start", l.slot.row_start}, {"row_end", l.slot.row_end}}},
              {"baseline_row", l.baseline_row},
              {"col_start", l.col_start},
              {"centerline_rows", l.centerline},
              {"glyph_pixels", l.glyph_pixels}};
    if (l.glyph_box) {
      lead["glyph_box"] = {{"min_row", l.glyph_box->min_row},
                           {"max_row", l.glyph_box->max_row},
                           {"min_col", l.glyph_box->min_col},
                           {"max_col", l.glyph_box->max_col}};
    }
    leads.push_back(std::move(lead));
  }
  return Json{{"schema_version", kManifestSchemaVersion},
              {"image", {{"width", width}, {"height", height}}},
              {"px_per_mm", gt.px_per_mm},
              {"mv_per_mm", gt.mv_per_mm},
              {"ms_per_mm", gt.ms_per_mm},
              {"stroke_width_px", gt.stroke_width_px},
              {"trace_pixels", count_active(gt.trace_mask)},
              {"glyph_pixels", count_active(gt.glyph_mask)},
              {"grid_only_pixels", count_active(gt.grid_only_mask)},
              {"leads", std::move(leads)}};
}

}  // namespace ecgd

#endif  // ECGD_SERIALIZE_HPP
