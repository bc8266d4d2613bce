import doctest
import importlib

import pytest

MODULES = ["geometry", "predicates", "freespace", "encoding", "blocked", "distance", "io"]


@pytest.mark.parametrize("name", MODULES)
def test_module_doctests(name):
    mod = importlib.import_module(f"frechetbox.{name}")
    result = doctest.testmod(mod, optionflags=doctest.ELLIPSIS)
    assert result.failed == 0
