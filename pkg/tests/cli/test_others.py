from importlib import metadata
from unittest import mock

from flockdelay.cli.commands.base import BaseCommand
from flockdelay.config import ConfigItem


class HelloCommand(BaseCommand):
    def add_arguments(self, parser) -> None:
        parser.add_argument("-n", "--name", help="The person's name")

    def handle(self, workspace, options) -> None:
        greeting = "Hello world"
        if options.name:
            greeting = f"Hello, {options.name}"
        print(greeting)


def new_command(core):
    core.register_command(HelloCommand, "hello")


def add_new_config(core):
    core.add_config("foo", ConfigItem("Test config", "bar"))


def broken_plugin(core):
    raise RuntimeError("not today")


def make_entry_point(plugin):
    ret = mock.Mock()
    ret.load.return_value = plugin
    ret.name, ret.value = plugin.__name__, f"tests:{plugin.__name__}"
    return ret


def test_help_option(flock):
    result = flock(["--help"])
    assert "Usage: flockdelay" in result.output
    for command in ("run", "sweep", "verify-pe", "bounds", "config"):
        assert command in result.output


def test_no_command_prints_help(flock):
    result = flock([])
    assert result.exit_code == 0
    assert "Usage: flockdelay" in result.output


def test_version_option(flock, core):
    result = flock(["--version"])
    assert result.exit_code == 0
    assert f"flockdelay, version {core.version}" in result.output


def test_unknown_command(flock):
    result = flock(["fly"])
    assert result.exit_code == 2
    assert "invalid choice" in result.stderr


def test_plugin_new_command(flock, mocker, core):
    mocker.patch.object(metadata, "entry_points", return_value=[make_entry_point(new_command)])
    core.init_parser()
    core.load_plugins()
    result = flock(["--help"])
    assert "hello" in result.output

    result = flock(["hello", "-n", "Frost"])
    assert result.output.strip() == "Hello, Frost"


def test_plugin_new_config(flock, mocker, core, workspace):
    mocker.patch.object(metadata, "entry_points", return_value=[make_entry_point(add_new_config)])
    core.load_plugins()
    result = flock(["config", "foo"], obj=core.create_workspace(str(workspace.config.config_file)))
    assert result.output.strip() == "bar"


def test_broken_plugin_is_reported(mocker, core, capsys):
    mocker.patch.object(metadata, "entry_points", return_value=[make_entry_point(broken_plugin)])
    core.load_plugins()
    assert "Failed to load plugin broken_plugin=tests:broken_plugin: not today" in " ".join(
        capsys.readouterr().err.split()
    )
