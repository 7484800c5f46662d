import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

from utils.arith import SIEVE_GUARD, cutoff_for
from utils.errors import ConfigError

load_dotenv()


class Config:
    # Zero table: bundled 100-zero file unless a path is given
    ZEROS_PATH = os.environ.get('SCREWLINE_ZEROS') or None

    # Results go here when --out is a bare filename
    OUTPUT_FOLDER = os.environ.get('SCREWLINE_OUTPUT_DIR', 'results')

    THREADS = int(os.environ.get('SCREWLINE_THREADS', 1))
    QUAD_RADIUS = float(os.environ.get('SCREWLINE_RADIUS', 2000.0))
    REL_TOL = float(os.environ.get('SCREWLINE_TOL', 1e-8))
    SEED = int(os.environ.get('SCREWLINE_SEED', 0))
    LOG_LEVEL = os.environ.get('SCREWLINE_LOG_LEVEL', 'WARNING')

    DEFAULT_T_VALUES = [0.5, 1.0, 2.0, 4.0]
    OUTPUT_FORMATS = ('table', 'csv', 'json')

    @staticmethod
    def init_app(run_config):
        # Ensure output folder exists
        folder = run_config.output_folder
        if folder and not os.path.exists(folder):
            os.makedirs(folder)


@dataclass
class RunConfig:
    zeros_path: str = Config.ZEROS_PATH
    t_values: list = field(default_factory=lambda: list(Config.DEFAULT_T_VALUES))
    quad_radius: float = Config.QUAD_RADIUS
    rel_tol: float = Config.REL_TOL
    threads: int = Config.THREADS
    output_format: str = 'table'
    seed: int = Config.SEED
    output_folder: str = Config.OUTPUT_FOLDER

    def validate(self):
        if self.zeros_path is not None and not os.path.isfile(self.zeros_path):
            raise ConfigError(f"zero table not found: {self.zeros_path}")
        if self.output_format not in Config.OUTPUT_FORMATS:
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if not self.quad_radius > 0:
            raise ConfigError("radius must be positive")
        if not 0 < self.rel_tol < 0.1:
            raise ConfigError("tol must lie in (0, 0.1)")
        for t in self.t_values:
            if not abs(t) < 20.0 or cutoff_for(t) > SIEVE_GUARD:
                raise ConfigError(f"t={t:g} is outside the sieve range (e^|t| <= {SIEVE_GUARD:g})")
        return self

    def options(self):
        """Options handed to the acceptance suite."""
        return {
            'threads': self.threads,
            'radius': self.quad_radius,
            'rel_tol': self.rel_tol,
            'seed': self.seed,
        }
