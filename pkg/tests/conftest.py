import pytest

from fastfish.backends import available


@pytest.fixture(scope="session")
def py_and_ext():
    """Backend names present in this build ('py' always, 'ext' when compiled)."""
    return available()
