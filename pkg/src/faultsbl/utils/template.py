from jinja2 import Environment, PackageLoader, StrictUndefined, TemplateNotFound

from faultsbl.errors import ConfigError


def build_env(package: str, templates_dir: str = "templates") -> Environment:
    return Environment(
        loader=PackageLoader(package, templates_dir),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )


def render_template(package: str, name: str, **ctx) -> str:
    env = build_env(package)
    try:
        template = env.get_template(name)
    except TemplateNotFound:
        raise ConfigError("template", f"no template named {name!r}") from None
    return template.render(**ctx)


def list_templates(package: str, suffix: str) -> list[str]:
    """Names of the public templates, without suffix; ``_``-prefixed ones are layouts."""
    env = build_env(package)
    return sorted(
        name.removesuffix(suffix)
        for name in env.list_templates()
        if name.endswith(suffix) and not name.startswith("_")
    )
