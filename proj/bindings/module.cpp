#include <pybind11/pybind11.h>
PYBIND11_MODULE(_chernlab, m) { m.doc() = "chernlab placeholder"; }
