#pragma once

#include <optional>
#include <string>

#include "sonowork/ingest.hpp"
#include "sonowork/plot.hpp"
#include "sonowork/synth.hpp"
#include "sonowork/transform.hpp"

namespace sonowork {

/// What to render from a table: the shared request shape of the CLI and the
/// HTTP service.
struct RenderRequest {
  std::optional<std::string> x_col;
  std::string y_col;
  TransformSpec transform;
  SonifyConfig config;
};

/// select_series followed by the transform pipeline.
inline Series transformed_series(const Table& table, const RenderRequest& req) {
  auto series = select_series(table, req.x_col ? std::optional<std::string_view>(*req.x_col) : std::nullopt, req.y_col);
  return apply_pipeline(std::move(series), req.transform);
}

/// Pipeline output rescaled to [0, 1] unless the last step already was a
/// normalize. Errors from the implicit normalize carry the step index one
/// past the last explicit step.
inline Series sonification_series(const Table& table, const RenderRequest& req) {
  auto series = transformed_series(table, req);
  if (ends_with_normalize(req.transform)) return series;
  try {
    return normalize(std::move(series));
  } catch (Error& e) {
    e.step = req.transform.steps.size();
    throw;
  }
}

inline AudioBuffer render_sonification(const Table& table, const RenderRequest& req) {
  return sonify_series(sonification_series(table, req), req.config);
}

inline std::string render_request_plot(const Table& table, const RenderRequest& req, int width = 640,
                                       int height = 360) {
  return render_plot(transformed_series(table, req), width, height);
}

}  // namespace sonowork
