"""
Text netlist format (.onl) for circuits.
"""

from src.netlist.emitter import emit, save_netlist
from src.netlist.parser import load_netlist, parse

__all__ = ["emit", "load_netlist", "parse", "save_netlist"]
