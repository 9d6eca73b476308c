#pragma once

#include <string>

#include "pinn/trainer.hpp"

namespace pinn {

/// iter,wall_s,loss,rel_l2,term<i>_loss...,term<i>_weight...[,term<i>_errbound...]
/// Identical runs produce identical files except for the wall_s column.
void write_history_csv(const std::string& path, const RunHistory& history,
                       size_t term_count, bool with_error_bounds);

/// Minimal hand-emitted SVG line panels: loss vs iteration (log scale),
/// loss vs wall time, and evaluation error vs iteration when available.
void write_history_svg(const std::string& path, const RunHistory& history);

}  // namespace pinn
