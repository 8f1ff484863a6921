"""Options shared by several commands."""

import click

config_option = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                             help="RunConfig JSON (defaults to the desk preset).")
seed_option = click.option("--seed", type=int, default=None, help="Override every seeded section.")
