#pragma once

namespace pinn {

/// Entry point behind the `pinn` binary: subcommands bench, sweep, reftable.
/// Returns 0 on success, 1 on run failure, 2 on bad flags.
int cli_run(int argc, const char* const* argv);

}  // namespace pinn
