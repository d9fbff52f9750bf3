"""Linear-sweep 32-bit x86 instruction counting.

The decoder covers the whole one-byte opcode map, the common two-byte
(0F) map including conditional families and packed-math rows, a slice of
the 0F 38 / 0F 3A maps, the full x87 escape range D8-DF, legacy prefixes
and the 32- and 16-bit ModRM/SIB/displacement rules. It recovers only
mnemonics and lengths - never operands.

Decoding is total: a byte that does not start a supported instruction is
counted as unknown and the sweep advances one byte, so progress is
guaranteed and identical bytes always produce identical counts.

Naming follows the x86 reference spellings, lowercased, with three
counting conventions: string operations collapse to their size-less stem
(movs, stos, lods, scas, cmps, ins, outs), conditional families keep the
full condition (ja, jnb, setnbe, cmovnle, ...), and an x87 instruction
fused with a preceding wait byte (9B) is counted as its wait form
(fstsw, finit, ...) while a bare 9B counts as wait.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NoExecutableSection, NoInstructionsDecoded
from .pe import PeImage, parse_pe
from .reports import OpcodeHistogram

PREFIX_BYTES = frozenset({0x26, 0x2E, 0x36, 0x3E, 0x64, 0x65, 0x66, 0x67, 0xF0, 0xF2, 0xF3})
MAX_INSTRUCTION_LENGTH = 15

# immediate codes: ib/iw/id fixed bytes, iz and relz shrink to 16 bits
# under the operand-size prefix, ptr is a far pointer, moffs follows the
# address size, enter is iw+ib
_IMM_FIXED = {"ib": 1, "iw": 2, "id": 4, "rel8": 1, "enter": 3}


@dataclass(frozen=True)
class OpSpec:
    mnemonic: str | None
    modrm: bool = False
    imm: str | None = None
    group: str | None = None


_JCC = ("jo", "jno", "jb", "jnb", "jz", "jnz", "jbe", "ja",
        "js", "jns", "jp", "jnp", "jl", "jge", "jle", "jg")
_CC = ("o", "no", "b", "nb", "z", "nz", "be", "nbe",
       "s", "ns", "p", "np", "l", "nl", "le", "nle")

_GROUPS: dict[str, tuple[str | None, ...]] = {
    "grp1": ("add", "or", "adc", "sbb", "and", "sub", "xor", "cmp"),
    "grp1a": ("pop", None, None, None, None, None, None, None),
    "grp2": ("rol", "ror", "rcl", "rcr", "shl", "shr", "shl", "sar"),
    "grp3b": ("test", "test", "not", "neg", "mul", "imul", "div", "idiv"),
    "grp3z": ("test", "test", "not", "neg", "mul", "imul", "div", "idiv"),
    "grp4": ("inc", "dec", None, None, None, None, None, None),
    "grp5": ("inc", "dec", "call", "call", "jmp", "jmp", "push", None),
    "grp6": ("sldt", "str", "lldt", "ltr", "verr", "verw", None, None),
    "grp7": ("sgdt", "sidt", "lgdt", "lidt", "smsw", None, "lmsw", "invlpg"),
    "grp8": (None, None, None, None, "bt", "bts", "btr", "btc"),
    "grp11": ("mov", None, None, None, None, None, None, None),
    "grp12": (None, None, "psrlw", None, "psraw", None, "psllw", None),
    "grp13": (None, None, "psrld", None, "psrad", None, "pslld", None),
    "grp14": (None, None, "psrlq", "psrldq", None, None, "psllq", "pslldq"),
    "grp9": (None, "cmpxchg8b", None, None, None, None, None, None),
}

# x87 memory forms, selected by the modrm reg field
_X87_MEM: dict[int, tuple[str | None, ...]] = {
    0xD8: ("fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"),
    0xD9: ("fld", None, "fst", "fstp", "fldenv", "fldcw", "fnstenv", "fnstcw"),
    0xDA: ("fiadd", "fimul", "ficom", "ficomp", "fisub", "fisubr", "fidiv", "fidivr"),
    0xDB: ("fild", "fisttp", "fist", "fistp", None, "fld", None, "fstp"),
    0xDC: ("fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"),
    0xDD: ("fld", "fisttp", "fst", "fstp", "frstor", None, "fnsave", "fnstsw"),
    0xDE: ("fiadd", "fimul", "ficom", "ficomp", "fisub", "fisubr", "fidiv", "fidivr"),
    0xDF: ("fild", "fisttp", "fist", "fistp", "fbld", "fild", "fbstp", "fistp"),
}


def _x87_register_forms() -> dict[int, dict[int, str]]:
    def block(base: int, name: str, count: int = 8) -> dict[int, str]:
        return {base + i: name for i in range(count)}

    d9 = {**block(0xC0, "fld"), **block(0xC8, "fxch"), 0xD0: "fnop",
          0xE0: "fchs", 0xE1: "fabs", 0xE4: "ftst", 0xE5: "fxam",
          0xE8: "fld1", 0xE9: "fldl2t", 0xEA: "fldl2e", 0xEB: "fldpi",
          0xEC: "fldlg2", 0xED: "fldln2", 0xEE: "fldz",
          0xF0: "f2xm1", 0xF1: "fyl2x", 0xF2: "fptan", 0xF3: "fpatan",
          0xF4: "fxtract", 0xF5: "fprem1", 0xF6: "fdecstp", 0xF7: "fincstp",
          0xF8: "fprem", 0xF9: "fyl2xp1", 0xFA: "fsqrt", 0xFB: "fsincos",
          0xFC: "frndint", 0xFD: "fscale", 0xFE: "fsin", 0xFF: "fcos"}
    return {
        0xD8: {**block(0xC0, "fadd"), **block(0xC8, "fmul"), **block(0xD0, "fcom"),
               **block(0xD8, "fcomp"), **block(0xE0, "fsub"), **block(0xE8, "fsubr"),
               **block(0xF0, "fdiv"), **block(0xF8, "fdivr")},
        0xD9: d9,
        0xDA: {**block(0xC0, "fcmovb"), **block(0xC8, "fcmove"),
               **block(0xD0, "fcmovbe"), **block(0xD8, "fcmovu"), 0xE9: "fucompp"},
        0xDB: {**block(0xC0, "fcmovnb"), **block(0xC8, "fcmovne"),
               **block(0xD0, "fcmovnbe"), **block(0xD8, "fcmovnu"),
               0xE2: "fnclex", 0xE3: "fninit",
               **block(0xE8, "fucomi"), **block(0xF0, "fcomi")},
        0xDC: {**block(0xC0, "fadd"), **block(0xC8, "fmul"), **block(0xE0, "fsubr"),
               **block(0xE8, "fsub"), **block(0xF0, "fdivr"), **block(0xF8, "fdiv")},
        0xDD: {**block(0xC0, "ffree"), **block(0xD0, "fst"), **block(0xD8, "fstp"),
               **block(0xE0, "fucom"), **block(0xE8, "fucomp")},
        0xDE: {**block(0xC0, "faddp"), **block(0xC8, "fmulp"), 0xD9: "fcompp",
               **block(0xE0, "fsubrp"), **block(0xE8, "fsubp"),
               **block(0xF0, "fdivrp"), **block(0xF8, "fdivp")},
        0xDF: {0xE0: "fnstsw", **block(0xE8, "fucomip"), **block(0xF0, "fcomip")},
    }


def _one_byte_table() -> dict[int, OpSpec]:
    t: dict[int, OpSpec] = {}
    for base, name in ((0x00, "add"), (0x08, "or"), (0x10, "adc"), (0x18, "sbb"),
                       (0x20, "and"), (0x28, "sub"), (0x30, "xor"), (0x38, "cmp")):
        for off in range(4):
            t[base + off] = OpSpec(name, modrm=True)
        t[base + 4] = OpSpec(name, imm="ib")
        t[base + 5] = OpSpec(name, imm="iz")
    for code, name in ((0x06, "push"), (0x07, "pop"), (0x0E, "push"), (0x16, "push"),
                       (0x17, "pop"), (0x1E, "push"), (0x1F, "pop"),
                       (0x27, "daa"), (0x2F, "das"), (0x37, "aaa"), (0x3F, "aas")):
        t[code] = OpSpec(name)
    for i in range(8):
        t[0x40 + i] = OpSpec("inc")
        t[0x48 + i] = OpSpec("dec")
        t[0x50 + i] = OpSpec("push")
        t[0x58 + i] = OpSpec("pop")
    t[0x60] = OpSpec("pusha")
    t[0x61] = OpSpec("popa")
    t[0x62] = OpSpec("bound", modrm=True)
    t[0x63] = OpSpec("arpl", modrm=True)
    t[0x68] = OpSpec("push", imm="iz")
    t[0x69] = OpSpec("imul", modrm=True, imm="iz")
    t[0x6A] = OpSpec("push", imm="ib")
    t[0x6B] = OpSpec("imul", modrm=True, imm="ib")
    t[0x6C] = t[0x6D] = OpSpec("ins")
    t[0x6E] = t[0x6F] = OpSpec("outs")
    for i, cc in enumerate(_JCC):
        t[0x70 + i] = OpSpec(cc, imm="rel8")
    t[0x80] = OpSpec(None, modrm=True, imm="ib", group="grp1")
    t[0x81] = OpSpec(None, modrm=True, imm="iz", group="grp1")
    t[0x82] = OpSpec(None, modrm=True, imm="ib", group="grp1")
    t[0x83] = OpSpec(None, modrm=True, imm="ib", group="grp1")
    t[0x84] = t[0x85] = OpSpec("test", modrm=True)
    t[0x86] = t[0x87] = OpSpec("xchg", modrm=True)
    for code in (0x88, 0x89, 0x8A, 0x8B, 0x8C, 0x8E):
        t[code] = OpSpec("mov", modrm=True)
    t[0x8D] = OpSpec("lea", modrm=True)
    t[0x8F] = OpSpec(None, modrm=True, group="grp1a")
    t[0x90] = OpSpec("nop")
    for i in range(1, 8):
        t[0x90 + i] = OpSpec("xchg")
    t[0x98] = OpSpec("cwde")
    t[0x99] = OpSpec("cdq")
    t[0x9A] = OpSpec("call", imm="ptr")
    t[0x9C] = OpSpec("pushf")
    t[0x9D] = OpSpec("popf")
    t[0x9E] = OpSpec("sahf")
    t[0x9F] = OpSpec("lahf")
    for code in (0xA0, 0xA1, 0xA2, 0xA3):
        t[code] = OpSpec("mov", imm="moffs")
    t[0xA4] = t[0xA5] = OpSpec("movs")
    t[0xA6] = t[0xA7] = OpSpec("cmps")
    t[0xA8] = OpSpec("test", imm="ib")
    t[0xA9] = OpSpec("test", imm="iz")
    t[0xAA] = t[0xAB] = OpSpec("stos")
    t[0xAC] = t[0xAD] = OpSpec("lods")
    t[0xAE] = t[0xAF] = OpSpec("scas")
    for i in range(8):
        t[0xB0 + i] = OpSpec("mov", imm="ib")
        t[0xB8 + i] = OpSpec("mov", imm="iz")
    t[0xC0] = OpSpec(None, modrm=True, imm="ib", group="grp2")
    t[0xC1] = OpSpec(None, modrm=True, imm="ib", group="grp2")
    t[0xC2] = OpSpec("ret", imm="iw")
    t[0xC3] = OpSpec("ret")
    t[0xC4] = OpSpec("les", modrm=True)
    t[0xC5] = OpSpec("lds", modrm=True)
    t[0xC6] = OpSpec(None, modrm=True, imm="ib", group="grp11")
    t[0xC7] = OpSpec(None, modrm=True, imm="iz", group="grp11")
    t[0xC8] = OpSpec("enter", imm="enter")
    t[0xC9] = OpSpec("leave")
    t[0xCA] = OpSpec("retf", imm="iw")
    t[0xCB] = OpSpec("retf")
    t[0xCC] = OpSpec("int3")
    t[0xCD] = OpSpec("int", imm="ib")
    t[0xCE] = OpSpec("into")
    t[0xCF] = OpSpec("iret")
    for code in (0xD0, 0xD1, 0xD2, 0xD3):
        t[code] = OpSpec(None, modrm=True, group="grp2")
    t[0xD4] = OpSpec("aam", imm="ib")
    t[0xD5] = OpSpec("aad", imm="ib")
    t[0xD6] = OpSpec("salc")
    t[0xD7] = OpSpec("xlat")
    for code in range(0xD8, 0xE0):
        t[code] = OpSpec(None, modrm=True, group="x87")
    t[0xE0] = OpSpec("loopne", imm="rel8")
    t[0xE1] = OpSpec("loope", imm="rel8")
    t[0xE2] = OpSpec("loop", imm="rel8")
    t[0xE3] = OpSpec("jecxz", imm="rel8")
    t[0xE4] = t[0xE5] = OpSpec("in", imm="ib")
    t[0xE6] = t[0xE7] = OpSpec("out", imm="ib")
    t[0xE8] = OpSpec("call", imm="relz")
    t[0xE9] = OpSpec("jmp", imm="relz")
    t[0xEA] = OpSpec("jmp", imm="ptr")
    t[0xEB] = OpSpec("jmp", imm="rel8")
    t[0xEC] = t[0xED] = OpSpec("in")
    t[0xEE] = t[0xEF] = OpSpec("out")
    t[0xF1] = OpSpec("int1")
    t[0xF4] = OpSpec("hlt")
    t[0xF5] = OpSpec("cmc")
    t[0xF6] = OpSpec(None, modrm=True, group="grp3b")
    t[0xF7] = OpSpec(None, modrm=True, group="grp3z")
    t[0xF8] = OpSpec("clc")
    t[0xF9] = OpSpec("stc")
    t[0xFA] = OpSpec("cli")
    t[0xFB] = OpSpec("sti")
    t[0xFC] = OpSpec("cld")
    t[0xFD] = OpSpec("std")
    t[0xFE] = OpSpec(None, modrm=True, group="grp4")
    t[0xFF] = OpSpec(None, modrm=True, group="grp5")
    return t


def _two_byte_table() -> dict[tuple[int | None, int], OpSpec]:
    t: dict[tuple[int | None, int], OpSpec] = {}

    def put(op: int, name: str, prefix: int | None = None, modrm: bool = True, imm: str | None = None):
        t[(prefix, op)] = OpSpec(name, modrm=modrm, imm=imm)

    t[(None, 0x00)] = OpSpec(None, modrm=True, group="grp6")
    t[(None, 0x01)] = OpSpec(None, modrm=True, group="grp7")
    put(0x02, "lar")
    put(0x03, "lsl")
    put(0x06, "clts", modrm=False)
    put(0x08, "invd", modrm=False)
    put(0x09, "wbinvd", modrm=False)
    put(0x0B, "ud2", modrm=False)
    put(0x0D, "prefetch")
    put(0x10, "movups"); put(0x10, "movupd", 0x66); put(0x10, "movss", 0xF3); put(0x10, "movsd", 0xF2)
    put(0x11, "movups"); put(0x11, "movupd", 0x66); put(0x11, "movss", 0xF3); put(0x11, "movsd", 0xF2)
    put(0x12, "movlps"); put(0x13, "movlps")
    put(0x14, "unpcklps"); put(0x15, "unpckhps")
    put(0x16, "movhps"); put(0x17, "movhps")
    put(0x18, "prefetch")
    for op in range(0x19, 0x20):
        put(op, "nop")
    for op in range(0x20, 0x24):
        put(op, "mov")
    put(0x28, "movaps"); put(0x28, "movapd", 0x66)
    put(0x29, "movaps"); put(0x29, "movapd", 0x66)
    put(0x2A, "cvtpi2ps"); put(0x2A, "cvtsi2ss", 0xF3); put(0x2A, "cvtsi2sd", 0xF2)
    put(0x2B, "movntps")
    put(0x2C, "cvttps2pi"); put(0x2C, "cvttpd2pi", 0x66); put(0x2C, "cvttss2si", 0xF3); put(0x2C, "cvttsd2si", 0xF2)
    put(0x2D, "cvtps2pi"); put(0x2D, "cvtss2si", 0xF3); put(0x2D, "cvtsd2si", 0xF2)
    put(0x2E, "ucomiss"); put(0x2E, "ucomisd", 0x66)
    put(0x2F, "comiss"); put(0x2F, "comisd", 0x66)
    put(0x30, "wrmsr", modrm=False)
    put(0x31, "rdtsc", modrm=False)
    put(0x32, "rdmsr", modrm=False)
    put(0x33, "rdpmc", modrm=False)
    put(0x34, "sysenter", modrm=False)
    put(0x35, "sysexit", modrm=False)
    for i, cc in enumerate(_CC):
        put(0x40 + i, "cmov" + cc)
    put(0x50, "movmskps")
    put(0x51, "sqrtps"); put(0x51, "sqrtpd", 0x66); put(0x51, "sqrtss", 0xF3); put(0x51, "sqrtsd", 0xF2)
    put(0x52, "rsqrtps"); put(0x53, "rcpps")
    put(0x54, "andps"); put(0x54, "andpd", 0x66)
    put(0x55, "andnps"); put(0x55, "andnpd", 0x66)
    put(0x56, "orps"); put(0x56, "orpd", 0x66)
    put(0x57, "xorps"); put(0x57, "xorpd", 0x66)
    put(0x58, "addps"); put(0x58, "addpd", 0x66); put(0x58, "addss", 0xF3); put(0x58, "addsd", 0xF2)
    put(0x59, "mulps"); put(0x59, "mulpd", 0x66); put(0x59, "mulss", 0xF3); put(0x59, "mulsd", 0xF2)
    put(0x5A, "cvtps2pd"); put(0x5B, "cvtdq2ps")
    put(0x5C, "subps"); put(0x5C, "subpd", 0x66); put(0x5C, "subss", 0xF3); put(0x5C, "subsd", 0xF2)
    put(0x5D, "minps"); put(0x5D, "minpd", 0x66); put(0x5D, "minss", 0xF3); put(0x5D, "minsd", 0xF2)
    put(0x5E, "divps"); put(0x5E, "divpd", 0x66); put(0x5E, "divss", 0xF3); put(0x5E, "divsd", 0xF2)
    put(0x5F, "maxps"); put(0x5F, "maxpd", 0x66); put(0x5F, "maxss", 0xF3); put(0x5F, "maxsd", 0xF2)
    put(0x60, "punpcklbw"); put(0x61, "punpcklwd"); put(0x62, "punpckldq"); put(0x63, "packsswb")
    put(0x64, "pcmpgtb"); put(0x65, "pcmpgtw"); put(0x66, "pcmpgtd"); put(0x67, "packuswb")
    put(0x68, "punpckhbw"); put(0x69, "punpckhwd"); put(0x6A, "punpckhdq"); put(0x6B, "packssdw")
    put(0x6C, "punpcklqdq", 0x66); put(0x6D, "punpckhqdq", 0x66)
    put(0x6E, "movd")
    put(0x6F, "movq"); put(0x6F, "movdqa", 0x66); put(0x6F, "movdqu", 0xF3)
    put(0x70, "pshufw", imm="ib"); put(0x70, "pshufd", 0x66, imm="ib")
    put(0x70, "pshufhw", 0xF3, imm="ib"); put(0x70, "pshuflw", 0xF2, imm="ib")
    t[(None, 0x71)] = OpSpec(None, modrm=True, imm="ib", group="grp12")
    t[(None, 0x72)] = OpSpec(None, modrm=True, imm="ib", group="grp13")
    t[(None, 0x73)] = OpSpec(None, modrm=True, imm="ib", group="grp14")
    put(0x74, "pcmpeqb"); put(0x75, "pcmpeqw"); put(0x76, "pcmpeqd")
    put(0x77, "emms", modrm=False)
    put(0x7E, "movd"); put(0x7E, "movq", 0xF3)
    put(0x7F, "movq"); put(0x7F, "movdqa", 0x66); put(0x7F, "movdqu", 0xF3)
    for i, cc in enumerate(_JCC):
        put(0x80 + i, cc, modrm=False, imm="relz")
    for i, cc in enumerate(_CC):
        put(0x90 + i, "set" + cc)
    put(0xA0, "push", modrm=False); put(0xA1, "pop", modrm=False)
    put(0xA2, "cpuid", modrm=False)
    put(0xA3, "bt")
    put(0xA4, "shld", imm="ib"); put(0xA5, "shld")
    put(0xA8, "push", modrm=False); put(0xA9, "pop", modrm=False)
    put(0xAA, "rsm", modrm=False)
    put(0xAB, "bts")
    put(0xAC, "shrd", imm="ib"); put(0xAD, "shrd")
    t[(None, 0xAE)] = OpSpec(None, modrm=True, group="grp15")
    put(0xAF, "imul")
    put(0xB0, "cmpxchg"); put(0xB1, "cmpxchg")
    put(0xB2, "lss"); put(0xB4, "lfs"); put(0xB5, "lgs")
    put(0xB3, "btr")
    put(0xB6, "movzx"); put(0xB7, "movzx")
    put(0xB8, "popcnt", 0xF3)
    t[(None, 0xBA)] = OpSpec(None, modrm=True, imm="ib", group="grp8")
    put(0xBB, "btc")
    put(0xBC, "bsf"); put(0xBD, "bsr")
    put(0xBE, "movsx"); put(0xBF, "movsx")
    put(0xC0, "xadd"); put(0xC1, "xadd")
    put(0xC2, "cmpps", imm="ib"); put(0xC2, "cmppd", 0x66, imm="ib")
    put(0xC2, "cmpss", 0xF3, imm="ib"); put(0xC2, "cmpsd", 0xF2, imm="ib")
    put(0xC3, "movnti")
    put(0xC4, "pinsrw", imm="ib"); put(0xC5, "pextrw", imm="ib")
    put(0xC6, "shufps", imm="ib"); put(0xC6, "shufpd", 0x66, imm="ib")
    t[(None, 0xC7)] = OpSpec(None, modrm=True, group="grp9")
    for op in range(0xC8, 0xD0):
        put(op, "bswap", modrm=False)
    put(0xD0, "addsubpd", 0x66)
    put(0xD1, "psrlw"); put(0xD2, "psrld"); put(0xD3, "psrlq")
    put(0xD4, "paddq"); put(0xD5, "pmullw")
    put(0xD6, "movq", 0x66)
    put(0xD7, "pmovmskb")
    put(0xD8, "psubusb"); put(0xD9, "psubusw"); put(0xDA, "pminub"); put(0xDB, "pand")
    put(0xDC, "paddusb"); put(0xDD, "paddusw"); put(0xDE, "pmaxub"); put(0xDF, "pandn")
    put(0xE0, "pavgb"); put(0xE1, "psraw"); put(0xE2, "psrad"); put(0xE3, "pavgw")
    put(0xE4, "pmulhuw"); put(0xE5, "pmulhw")
    put(0xE6, "cvttpd2dq", 0x66); put(0xE6, "cvtdq2pd", 0xF3); put(0xE6, "cvtpd2dq", 0xF2)
    put(0xE7, "movntq"); put(0xE7, "movntdq", 0x66)
    put(0xE8, "psubsb"); put(0xE9, "psubsw"); put(0xEA, "pminsw"); put(0xEB, "por")
    put(0xEC, "paddsb"); put(0xED, "paddsw"); put(0xEE, "pmaxsw"); put(0xEF, "pxor")
    put(0xF0, "lddqu", 0xF2)
    put(0xF1, "psllw"); put(0xF2, "pslld"); put(0xF3, "psllq")
    put(0xF4, "pmuludq"); put(0xF5, "pmaddwd"); put(0xF6, "psadbw"); put(0xF7, "maskmovq")
    put(0xF8, "psubb"); put(0xF9, "psubw"); put(0xFA, "psubd"); put(0xFB, "psubq")
    put(0xFC, "paddb"); put(0xFD, "paddw"); put(0xFE, "paddd")
    return t


_THREE_BYTE_38 = {
    0x00: "pshufb", 0x01: "phaddw", 0x02: "phaddd", 0x03: "phaddsw",
    0x04: "pmaddubsw", 0x05: "phsubw", 0x06: "phsubd", 0x07: "phsubsw",
    0x08: "psignb", 0x09: "psignw", 0x0A: "psignd", 0x0B: "pmulhrsw",
    0x10: "pblendvb", 0x14: "blendvps", 0x15: "blendvpd", 0x17: "ptest",
    0x1C: "pabsb", 0x1D: "pabsw", 0x1E: "pabsd",
    0x20: "pmovsxbw", 0x21: "pmovsxbd", 0x22: "pmovsxbq",
    0x23: "pmovsxwd", 0x24: "pmovsxwq", 0x25: "pmovsxdq",
    0x28: "pmuldq", 0x29: "pcmpeqq", 0x2A: "movntdqa", 0x2B: "packusdw",
    0x30: "pmovzxbw", 0x31: "pmovzxbd", 0x32: "pmovzxbq",
    0x33: "pmovzxwd", 0x34: "pmovzxwq", 0x35: "pmovzxdq",
    0x38: "pminsb", 0x39: "pminsd", 0x3A: "pminuw", 0x3B: "pminud",
    0x3C: "pmaxsb", 0x3D: "pmaxsd", 0x3E: "pmaxuw", 0x3F: "pmaxud",
    0x40: "pmulld", 0x41: "phminposuw",
}

_THREE_BYTE_3A = {
    0x08: "roundps", 0x09: "roundpd", 0x0A: "roundss", 0x0B: "roundsd",
    0x0C: "blendps", 0x0D: "blendpd", 0x0E: "pblendw", 0x0F: "palignr",
    0x14: "pextrb", 0x15: "pextrw", 0x16: "pextrd", 0x17: "extractps",
    0x20: "pinsrb", 0x21: "insertps", 0x22: "pinsrd",
    0x40: "dpps", 0x41: "dppd", 0x42: "mpsadbw", 0x44: "pclmulqdq",
    0x60: "pcmpestrm", 0x61: "pcmpestri", 0x62: "pcmpistrm", 0x63: "pcmpistri",
    0xDF: "aeskeygenassist",
}

_GRP15_MEM = ("fxsave", "fxrstor", "ldmxcsr", "stmxcsr", "xsave", None, "xsaveopt", "clflush")
_GRP15_REG = (None, None, None, None, None, "lfence", "mfence", "sfence")

# wait-prefix fusion targets: (escape byte, modrm reg field or exact
# register-form byte) -> wait-form mnemonic
_WAIT_MEM = {(0xD9, 6): "fstenv", (0xD9, 7): "fstcw", (0xDD, 6): "fsave", (0xDD, 7): "fstsw"}
_WAIT_REG = {(0xDB, 0xE2): "fclex", (0xDB, 0xE3): "finit", (0xDF, 0xE0): "fstsw"}


@dataclass(frozen=True)
class DecoderProfile:
    one_byte: dict[int, OpSpec]
    two_byte: dict[tuple[int | None, int], OpSpec]
    three_byte_38: dict[int, str]
    three_byte_3a: dict[int, str]
    x87_mem: dict[int, tuple[str | None, ...]]
    x87_reg: dict[int, dict[int, str]]


_DEFAULT_PROFILE: DecoderProfile | None = None


def default_profile() -> DecoderProfile:
    global _DEFAULT_PROFILE
    if _DEFAULT_PROFILE is None:
        _DEFAULT_PROFILE = DecoderProfile(
            one_byte=_one_byte_table(),
            two_byte=_two_byte_table(),
            three_byte_38=dict(_THREE_BYTE_38),
            three_byte_3a=dict(_THREE_BYTE_3A),
            x87_mem=dict(_X87_MEM),
            x87_reg=_x87_register_forms(),
        )
    return _DEFAULT_PROFILE


@dataclass(frozen=True)
class DecodedInstruction:
    mnemonic: str
    length: int


@dataclass
class DecodedCount:
    counts: dict[str, int] = field(default_factory=dict)
    unknown_bytes: int = 0
    decoded_instructions: int = 0


def _modrm_block_length(code: bytes, pos: int, limit: int, asize16: bool) -> tuple[int, int] | None:
    """Bytes consumed by modrm + sib + displacement, plus the modrm byte
    itself; None when it runs past the limit."""
    if pos >= limit:
        return None
    modrm = code[pos]
    mod, rm = modrm >> 6, modrm & 7
    if mod == 3:
        return 1, modrm
    if asize16:
        if mod == 0:
            length = 3 if rm == 6 else 1
        elif mod == 1:
            length = 2
        else:
            length = 3
        return (length, modrm) if pos + length <= limit else None
    length = 1
    if rm == 4:
        if pos + 1 >= limit:
            return None
        sib = code[pos + 1]
        length += 1
        base = sib & 7
        if mod == 0:
            length += 4 if base == 5 else 0
        elif mod == 1:
            length += 1
        else:
            length += 4
    else:
        if mod == 0:
            length += 4 if rm == 5 else 0
        elif mod == 1:
            length += 1
        else:
            length += 4
    return (length, modrm) if pos + length <= limit else None


def _imm_length(imm: str | None, osize16: bool, asize16: bool) -> int:
    if imm is None:
        return 0
    if imm in _IMM_FIXED:
        return _IMM_FIXED[imm]
    if imm == "iz" or imm == "relz":
        return 2 if osize16 else 4
    if imm == "ptr":
        return 4 if osize16 else 6
    if imm == "moffs":
        return 2 if asize16 else 4
    raise ValueError(f"unknown immediate code {imm!r}")


def decode_one(code: bytes, pos: int, profile: DecoderProfile | None = None) -> DecodedInstruction | None:
    """Decode the instruction starting at ``pos``; None when the byte does
    not begin a supported, fully-contained instruction."""
    profile = profile or default_profile()
    start = pos
    limit = min(len(code), start + MAX_INSTRUCTION_LENGTH)
    osize16 = asize16 = False
    while pos < limit and code[pos] in PREFIX_BYTES:
        b = code[pos]
        if b == 0x66:
            osize16 = True
        elif b == 0x67:
            asize16 = True
        pos += 1
    if pos >= limit:
        return None
    rep = None
    for b in code[start:pos]:
        if b in (0xF2, 0xF3):
            rep = b
    opcode = code[pos]
    pos += 1

    if opcode == 0x9B:
        fused = _wait_fusion(code, pos, limit, asize16, profile)
        if fused is not None:
            name, extra = fused
            return DecodedInstruction(name, pos - start + extra)
        return DecodedInstruction("wait", pos - start)

    if 0xD8 <= opcode <= 0xDF:
        block = _modrm_block_length(code, pos, limit, asize16)
        if block is None:
            return None
        length, modrm = block
        if modrm >= 0xC0:
            name = profile.x87_reg[opcode].get(modrm)
        else:
            name = profile.x87_mem[opcode][(modrm >> 3) & 7]
        if name is None:
            return None
        return DecodedInstruction(name, pos - start + length)

    if opcode == 0x0F:
        return _decode_0f(code, start, pos, limit, osize16, asize16, rep, profile)

    spec = profile.one_byte.get(opcode)
    if spec is None:
        return None
    return _finish(code, start, pos, limit, spec, osize16, asize16, profile)


def _select_two_byte(profile: DecoderProfile, prefix_key: int | None, op: int) -> OpSpec | None:
    if prefix_key is not None:
        spec = profile.two_byte.get((prefix_key, op))
        if spec is not None:
            return spec
    return profile.two_byte.get((None, op))


def _decode_0f(code, start, pos, limit, osize16, asize16, rep, profile) -> DecodedInstruction | None:
    if pos >= limit:
        return None
    op = code[pos]
    pos += 1
    if op in (0x38, 0x3A):
        if pos >= limit:
            return None
        sub = code[pos]
        pos += 1
        table = profile.three_byte_38 if op == 0x38 else profile.three_byte_3a
        name = table.get(sub)
        if name is None:
            return None
        spec = OpSpec(name, modrm=True, imm="ib" if op == 0x3A else None)
        return _finish(code, start, pos, limit, spec, osize16, asize16, profile)
    prefix_key = rep if rep is not None else (0x66 if osize16 else None)
    spec = _select_two_byte(profile, prefix_key, op)
    if spec is None:
        return None
    return _finish(code, start, pos, limit, spec, osize16, asize16, profile)


def _finish(code, start, pos, limit, spec: OpSpec, osize16, asize16, profile) -> DecodedInstruction | None:
    name = spec.mnemonic
    imm = spec.imm
    if spec.modrm:
        block = _modrm_block_length(code, pos, limit, asize16)
        if block is None:
            return None
        length, modrm = block
        reg = (modrm >> 3) & 7
        if spec.group == "grp15":
            name = _GRP15_REG[reg] if modrm >= 0xC0 else _GRP15_MEM[reg]
        elif spec.group == "grp7":
            # register forms of this group are mostly virtualization and
            # state opcodes outside the profile; only smsw/lmsw keep them
            name = _GROUPS["grp7"][reg] if (modrm < 0xC0 or reg in (4, 6)) else None
        elif spec.group in ("grp3b", "grp3z"):
            name = _GROUPS[spec.group][reg]
            imm = ("ib" if spec.group == "grp3b" else "iz") if reg <= 1 else None
        elif spec.group is not None:
            name = _GROUPS[spec.group][reg]
        pos += length
    if name is None:
        return None
    pos += _imm_length(imm, osize16, asize16)
    if pos > limit or pos > len(code):
        return None
    return DecodedInstruction(name, pos - start)


def _wait_fusion(code, pos, limit, asize16, profile) -> tuple[str, int] | None:
    """9B followed by one of the store/control x87 forms fuses into the
    wait-form mnemonic; returns (name, extra bytes after the 9B)."""
    if pos >= limit:
        return None
    esc = code[pos]
    if esc not in (0xD9, 0xDB, 0xDD, 0xDF):
        return None
    block = _modrm_block_length(code, pos + 1, limit, asize16)
    if block is None:
        return None
    length, modrm = block
    if modrm >= 0xC0:
        name = _WAIT_REG.get((esc, modrm))
        return (name, 2) if name else None
    name = _WAIT_MEM.get((esc, (modrm >> 3) & 7))
    return (name, 1 + length) if name else None


def sweep(code: bytes, profile: DecoderProfile | None = None) -> DecodedCount:
    """Linear sweep: decode, advance by the instruction length; count an
    undecodable byte as unknown and advance one byte."""
    profile = profile or default_profile()
    result = DecodedCount()
    pos = 0
    end = len(code)
    while pos < end:
        decoded = decode_one(code, pos, profile)
        if decoded is None:
            result.unknown_bytes += 1
            pos += 1
            continue
        result.counts[decoded.mnemonic] = result.counts.get(decoded.mnemonic, 0) + 1
        result.decoded_instructions += 1
        pos += decoded.length
    return result


def count_opcodes(image: PeImage, profile: DecoderProfile | None = None) -> DecodedCount:
    """Sweep every executable section of a parsed image."""
    sections = image.executable_sections()
    if not sections:
        raise NoExecutableSection("image has no executable section")
    total = DecodedCount()
    for section in sections:
        part = sweep(section.raw_data, profile)
        for name, count in part.counts.items():
            total.counts[name] = total.counts.get(name, 0) + count
        total.unknown_bytes += part.unknown_bytes
        total.decoded_instructions += part.decoded_instructions
    return total


def histogram_from_pe(data: bytes, sample_id: str, profile: DecoderProfile | None = None) -> OpcodeHistogram:
    image = parse_pe(data)
    counted = count_opcodes(image, profile)
    if counted.decoded_instructions == 0:
        raise NoInstructionsDecoded(f"{sample_id}: no instructions decoded")
    return OpcodeHistogram(
        sample_id=sample_id,
        counts=dict(counted.counts),
        total=counted.decoded_instructions,
        source="disassembly",
    )
