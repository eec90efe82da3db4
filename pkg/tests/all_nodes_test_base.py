import asyncio
import unittest
from functools import wraps
from typing import List

import funcnodes as fn

from funcnodes_monotone_nash import NODE_SHELF


def _hook(testcase, name, is_async=False):
    method = getattr(testcase, name, None)
    if method is not None:
        return method
    if is_async:

        async def noop(self):
            pass

        return noop
    return lambda self: None


def _wrap(test_method, testcase):
    setup, teardown = _hook(testcase, "setUp"), _hook(testcase, "tearDown")
    async_setup = _hook(testcase, "asyncSetUp", True)
    async_teardown = _hook(testcase, "asyncTearDown", True)

    if asyncio.iscoroutinefunction(test_method):

        async def wrapper(self):
            setup(self)
            await async_setup(self)
            try:
                await test_method(self)
            finally:
                teardown(self)
                await async_teardown(self)

    else:

        def wrapper(self):
            setup(self)
            try:
                test_method(self)
            finally:
                teardown(self)

    return wrapper


def add_subclass_tests(cls):
    """Copies every test of ``cls.sub_test_classes`` onto ``cls``."""
    for testcase in getattr(cls, "sub_test_classes", []):
        for name in dir(testcase):
            if name.startswith("test_"):
                setattr(
                    cls,
                    f"test_{testcase.__name__}_{name}",
                    _wrap(getattr(testcase, name), testcase),
                )


class TestAllNodesBase(unittest.IsolatedAsyncioTestCase):
    # test classes whose tests are run here as well; they must not rely on class-level setup
    sub_test_classes: List[unittest.IsolatedAsyncioTestCase] = []
    ignore_nodes: List[fn.Node] = []

    def __init_subclass__(cls) -> None:
        super().__init_subclass__()
        add_subclass_tests(cls)

    @classmethod
    def setUpClass(cls):
        from funcnodes_core import testing

        testing.setup()
        all_nodes = fn.flatten_shelf(NODE_SHELF)[0]
        untested = [n for n in all_nodes if n not in cls.ignore_nodes]

        def track(node_class):
            original = node_class.func
            node_class.TestAllNodes_func = original

            @wraps(original)
            async def func(self, *args, **kwargs):
                result = await original(self, *args, **kwargs)
                if node_class in untested:
                    untested.remove(node_class)
                return result

            node_class.func = func

        for node_class in all_nodes:
            track(node_class)
        cls.all_nodes = all_nodes
        cls.nodes_to_test = untested

    @classmethod
    def tearDownClass(cls):
        from funcnodes_core import testing

        testing.teardown()
        for node_class in cls.all_nodes:
            if hasattr(node_class, "TestAllNodes_func"):
                node_class.func = node_class.TestAllNodes_func
                del node_class.TestAllNodes_func
        if cls.nodes_to_test:
            raise AssertionError(
                f"These nodes were not tested ({len(cls.nodes_to_test)}): {cls.nodes_to_test}"
            )
