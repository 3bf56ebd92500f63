"""
Shared plumbing for the entrokey management commands.

Every command accepts --config, --seed, --out-dir and --quiet. Flags are
turned into dotted overrides of the run configuration, so a flag always
wins over the value in the TOML file. A command holds the lock on its
output directory while it runs.
"""

import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from entrokey.exceptions import EntrokeyError
from entrokey.pipeline import load_run_config, output_lock


class EntrokeyCommand(BaseCommand):
    # argparse dest -> dotted config key
    config_flags = {}

    def add_arguments(self, parser):
        parser.add_argument('--config', help='TOML run configuration file')
        parser.add_argument('--seed', type=int, help='Global seed (default from settings)')
        parser.add_argument('--out-dir', dest='out_dir', help='Output directory (ENTROKEY_OUT wins)')
        parser.add_argument('--quiet', action='store_true', help='Only report warnings and errors')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def config_overrides(self, options):
        overrides = {'seed': options.get('seed'), 'out_dir': options.get('out_dir')}
        for dest, dotted in self.config_flags.items():
            overrides[dotted] = options.get(dest)
        return overrides

    def handle(self, *args, **options):
        package_logger = logging.getLogger('entrokey')
        previous_level = package_logger.level
        if options['quiet']:
            package_logger.setLevel(logging.WARNING)
            self.verbosity = 0
        else:
            self.verbosity = options.get('verbosity', 1)
        try:
            config = load_run_config(options.get('config'), self.config_overrides(options))
            with output_lock(config.out_dir):
                self.run(config, options)
        except EntrokeyError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        finally:
            package_logger.setLevel(previous_level)

    def run(self, config, options):
        raise NotImplementedError

    def out_path(self, config, option, default):
        """An explicit file option, or the default location under the output directory."""
        return Path(option) if option else config.out_dir / default

    def success(self, message):
        if self.verbosity > 0:
            self.stdout.write(self.style.SUCCESS(message))

    def info(self, message):
        if self.verbosity > 0:
            self.stdout.write(message)
