import nox

nox.options.sessions = ["lint", "tests"]


@nox.session
def tests(session):
    session.install(".")
    session.install("pytest", "hypothesis")
    session.run("pytest", "-m", "not slow", *session.posargs)


@nox.session
def slow(session):
    session.install(".")
    session.install("pytest", "hypothesis")
    session.run("pytest", "-m", "slow", *session.posargs)


@nox.session
def lint(session):
    session.install("black", "isort")
    session.run("black", "--check", "src", "tests", "noxfile.py")
    session.run("isort", "--check-only", "src", "tests", "noxfile.py")
