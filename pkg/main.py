"""
kac-smoothing
Command-line entry point: spectral Kac solver and verification harness.
"""

import typer
import logfire

from config.settings import settings

# ================================================
# Handlers
# ================================================
from handlers.kolmogorov_handler import kolmogorov_command
from handlers.simulate_handler import simulate_command
from handlers.verify_handler import verify_command
from handlers.fit_handler import fit_command


# ================================================
# Logfire Configuration
# ================================================
logfire.configure(
    send_to_logfire="if-token-present",
    token=settings.LOGFIRE_TOKEN,
    console=None if settings.LOG_CONSOLE else False,
    service_name="kac-smoothing",
    service_version=settings.APP_VERSION,
)


# ================================================
# Typer Application
# ================================================
app = typer.Typer(
    name="kac-smoothing",
    help="Spectral solver and numerical-verification harness for the non-cutoff Kac equation.",
    no_args_is_help=True,
    add_completion=False,
)

# ================================================
# Commands
# ================================================
app.command("kolmogorov")(kolmogorov_command)
app.command("simulate")(simulate_command)
app.command("verify")(verify_command)
app.command("fit")(fit_command)


# ================================================
# Main Function
# ================================================
if __name__ == "__main__":
    app()
