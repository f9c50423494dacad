import datetime
from pathlib import Path

import jinja2
from rich.emoji import Emoji

from evconvex import __version__
from evconvex.checks import Status
from evconvex.reproduce import Reproduction


def _emojize(s):
    return Emoji.replace(s)


def _fmt(value, digits: int = 6):
    if value is None:
        return "-"
    return f"{value:.{digits}g}"


def make_environment() -> jinja2.Environment:
    env = jinja2.Environment(
        loader=jinja2.PackageLoader(package_name="evconvex"),
        extensions=["jinja2.ext.loopcontrols"],
        autoescape=jinja2.select_autoescape(["html"]),
    )

    env.globals["Status"] = Status
    env.filters["emojize"] = _emojize
    env.filters["fmt"] = _fmt

    return env


def make_report(reproduction: Reproduction, output: Path):
    env = make_environment()
    with output.open("w") as fh:
        fh.write(
            env.get_template("report.html.j2").render(
                reproduction=reproduction,
                version=__version__,
                generated=datetime.date.today().isoformat(),
            )
        )
