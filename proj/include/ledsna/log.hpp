#pragma once

namespace ledsna {

/// Sets the library log level from LEDSNA_LOG (error, info or debug;
/// default error). Messages go to stderr.
void init_logging_from_env();

}  // namespace ledsna
