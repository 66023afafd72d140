"""
Lark grammar for .onl netlists.

One statement per line, '#' starts a comment, tokens are whitespace separated.
Keywords should not be used as port names; builders never emit them.
"""

NETLIST_GRAMMAR = r"""
start: _NL? (statement _NL)*

?statement: source
          | bs
          | phase
          | atten
          | shift
          | sorter
          | merge
          | hwp
          | lunitary
          | detect

source: "source" PORT
bs: "bs" CONVENTION number PORT PORT "->" PORT PORT
phase: "phase" PORT number
atten: "atten" PORT number
shift: "shift" PORT SIGNED_INT
sorter: "sorter" PORT "reject" PORT "{" route* "}"
merge: "merge" PORT "{" route* "}"
route: LABEL ":" PORT
hwp: "hwp" PORT ORIENTATION
lunitary: "lunitary" PORT LABEL LABEL number number number number number number number number
detect: "detect" PORT PORT

number: SIGNED_NUMBER

CONVENTION: "hadamard" | "symmetric"
ORIENTATION: "plus45" | "minus45"
LABEL: /[+-]?[0-9]+/ | "H" | "V"
PORT: /[A-Za-z_][A-Za-z0-9_.]*/

COMMENT: /#[^\n]*/
_NL: /(\r?\n[\t ]*(#[^\n]*)?)+/

%import common.SIGNED_INT
%import common.SIGNED_NUMBER
%import common.WS_INLINE
%ignore WS_INLINE
%ignore COMMENT
"""
