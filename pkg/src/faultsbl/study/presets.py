"""Ready-made study configurations shipped as jinja2 templates."""

from faultsbl.errors import ConfigError
from faultsbl.utils.template import list_templates, render_template

TEMPLATES_PACKAGE = "faultsbl.study"
SUFFIX = ".toml.j2"


def preset_names() -> list[str]:
    return list_templates(TEMPLATES_PACKAGE, SUFFIX)


def render_preset(
    name: str,
    *,
    seed: int = 2024,
    trials: int = 100,
    jobs: int = 1,
    max_iters: int = 2000,
    output_dir: str | None = None,
) -> str:
    names = preset_names()
    if name not in names:
        raise ConfigError("template", f"unknown template {name!r}; choose from {', '.join(names)}")
    for field, value in (("seed", seed), ("trials", trials), ("jobs", jobs), ("max_iters", max_iters)):
        if value < (0 if field == "seed" else 1):
            raise ConfigError(field, f"invalid value {value}")
    return render_template(
        TEMPLATES_PACKAGE,
        f"{name}{SUFFIX}",
        preset=name,
        seed=seed,
        trials=trials,
        jobs=jobs,
        max_iters=max_iters,
        output_dir=output_dir or f"results/{name}",
    )
