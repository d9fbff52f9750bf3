"""Decoder unit vectors (hand-decoded lengths) and the length-soundness
property: instructions assembled by an independent byte generator must
decode to the assembled length."""

import numpy as np
import pytest

from opdense.x86 import MAX_INSTRUCTION_LENGTH, decode_one, default_profile, sweep

# (bytes, mnemonic, length) - lengths worked out by hand from the
# ModRM/SIB/displacement/immediate rules
VECTORS = [
    ("90", "nop", 1),
    ("C3", "ret", 1),
    ("C20400", "ret", 3),
    ("B801000000", "mov", 5),
    ("66B80100", "mov", 4),                # operand-size prefix shrinks imm
    ("0000", "add", 2),
    ("8B442404", "mov", 4),                # modrm + sib + disp8
    ("8D0485A0000000", "lea", 7),          # sib with base=101 and mod=0
    ("FF1578563412", "call", 6),
    ("FF25AABBCCDD", "jmp", 6),
    ("FFB42478563412", "push", 7),         # modrm + sib + disp32
    ("0FB6C0", "movzx", 3),
    ("0FBFD1", "movsx", 3),
    ("660F57C1", "xorpd", 4),
    ("0F57C1", "xorps", 3),
    ("F30F2CC8", "cvttss2si", 4),
    ("0F5CC1", "subps", 3),
    ("0F59C1", "mulps", 3),
    ("0FFDC1", "paddw", 3),
    ("0F58C1", "addps", 3),
    ("660F383AC1", "pminuw", 5),
    ("0F2FC8", "comiss", 3),
    ("0F60C1", "punpcklbw", 3),
    ("0FC8", "bswap", 2),
    ("0FAE15AABBCCDD", "ldmxcsr", 7),
    ("0F8D12345678", "jge", 6),
    ("7F05", "jg", 2),
    ("0F94C0", "setz", 3),
    ("0F97C1", "setnbe", 3),
    ("0F9FC2", "setnle", 3),
    ("0F45C8", "cmovnz", 3),
    ("0F46C8", "cmovbe", 3),
    ("D9E5", "fxam", 2),
    ("D9E1", "fabs", 2),
    ("D9EE", "fldz", 2),
    ("D9FC", "frndint", 2),
    ("DFE0", "fnstsw", 2),
    ("9BDFE0", "fstsw", 3),
    ("9BDD7DFE", "fstsw", 4),              # wait + fnstsw m16 fuses too
    ("9B", "wait", 1),
    ("9B90", "wait", 1),                   # 9B before a non-x87 opcode stays wait
    ("DBE3", "fninit", 2),
    ("9BDBE3", "finit", 3),
    ("DEF9", "fdivp", 2),
    ("DEE1", "fsubrp", 2),
    ("DEC9", "fmulp", 2),
    ("DAE9", "fucompp", 2),
    ("DB45F8", "fild", 3),
    ("DF45F8", "fild", 3),
    ("DB5DF8", "fistp", 3),
    ("DA75F8", "fidiv", 3),
    ("D8E1", "fsub", 2),
    ("DCE1", "fsubr", 2),                  # DC swaps the subtract direction
    ("DD45F8", "fld", 3),
    ("F3A4", "movs", 2),
    ("F3AA", "stos", 2),
    ("AC", "lods", 1),
    ("AE", "scas", 1),
    ("A6", "cmps", 1),
    ("F7D8", "neg", 2),
    ("F7C178563412", "test", 6),
    ("F6C101", "test", 3),
    ("F7E1", "mul", 2),
    ("F7F9", "idiv", 2),
    ("C1E002", "shl", 3),
    ("C0C804", "ror", 3),
    ("D1F8", "sar", 2),
    ("D3E0", "shl", 2),
    ("80C105", "add", 3),
    ("81C178563412", "add", 6),
    ("6681C13412", "add", 5),
    ("83C105", "add", 3),
    ("8F00", "pop", 2),
    ("C60001", "mov", 3),
    ("C70078563412", "mov", 6),
    ("68AABBCCDD", "push", 5),
    ("6A01", "push", 2),
    ("6BC010", "imul", 3),
    ("69C0A0000000", "imul", 6),
    ("0FAFC1", "imul", 3),
    ("E8FBFFFFFF", "call", 5),
    ("66E8FBFF", "call", 4),
    ("EB05", "jmp", 2),
    ("E2FA", "loop", 2),
    ("E3FA", "jecxz", 2),
    ("C8100002", "enter", 4),
    ("C9", "leave", 1),
    ("CC", "int3", 1),
    ("CD21", "int", 2),
    ("EA11223344AABB", "jmp", 7),
    ("66EA1122AABB", "jmp", 6),
    ("A144332211", "mov", 5),
    ("67A14433", "mov", 4),
    ("A2DEADBEEF", "mov", 5),
    ("2E8B0D78563412", "mov", 7),          # segment override prefix
    ("F0834C240801", "or", 6),             # lock prefix
    ("0F31", "rdtsc", 2),
    ("0FA2", "cpuid", 2),
    ("0F01D0", None, None),                # xgetbv: outside the profile
    ("0FA4C102", "shld", 4),
    ("0FACC102", "shrd", 4),
    ("0FBAE007", "bt", 4),
    ("D40A", "aam", 2),
    ("D7", "xlat", 1),
    ("670F94C0", "setz", 4),
    ("678B4F04", "mov", 4),                # 16-bit addressing: [bx+4]
    ("678B0E3412", "mov", 5),              # 16-bit addressing: [disp16]
]
VECTORS = [v for v in VECTORS if v[1] is not None]


@pytest.mark.parametrize("hexcode,mnemonic,length", VECTORS)
def test_hand_decoded_vectors(hexcode, mnemonic, length):
    code = bytes.fromhex(hexcode)
    decoded = decode_one(code, 0)
    assert decoded is not None, hexcode
    assert decoded.mnemonic == mnemonic
    assert decoded.length == length


def test_unsupported_bytes_are_unknown():
    assert decode_one(bytes.fromhex("0F01D0"), 0) is None


def test_truncated_instruction_is_unknown():
    assert decode_one(bytes.fromhex("B80100"), 0) is None
    assert decode_one(bytes.fromhex("8B"), 0) is None
    assert decode_one(bytes.fromhex("66"), 0) is None  # prefixes only


def test_sweep_example_counts():
    result = sweep(bytes.fromhex("9090C3"))
    assert result.counts == {"nop": 2, "ret": 1}
    assert result.unknown_bytes == 0
    assert result.decoded_instructions == 3


def test_sweep_unknown_byte_advances_one():
    result = sweep(bytes.fromhex("0F01D090"))
    assert result.unknown_bytes == 1
    # after skipping 0F, bytes 01 D0 decode as add and 90 as nop
    assert result.counts == {"add": 1, "nop": 1}


def test_sweep_mov_imm32_ret():
    result = sweep(bytes.fromhex("B801000000C3"))
    assert result.counts == {"mov": 1, "ret": 1}
    assert result.decoded_instructions == 2


def test_sweep_progress_and_determinism():
    rng = np.random.RandomState(0)
    blob = bytes(rng.randint(0, 256, size=5000, dtype=np.uint8))
    a = sweep(blob)
    b = sweep(blob)
    assert a.counts == b.counts
    assert a.unknown_bytes == b.unknown_bytes
    pos = 0
    steps = 0
    while pos < len(blob):
        d = decode_one(blob, pos)
        pos += 1 if d is None else d.length
        steps += 1
        assert steps <= len(blob)
    assert pos >= len(blob)


def test_instruction_straddling_end_counts_first_byte_unknown():
    # full mov imm32 is five bytes; cut it to three
    result = sweep(bytes.fromhex("B80100"))
    assert result.unknown_bytes == 1
    assert result.counts == {"add": 1}  # the tail 01 00 decodes as add


def _random_instruction(rng, profile):
    """Assemble a random instruction from the profile tables, computing the
    expected length with independent arithmetic."""
    roll = rng.rand()
    out = bytearray()
    expected_prefix = 0
    osize16 = asize16 = False
    if roll < 0.25:
        n_prefix = int(rng.randint(1, 3))
        choices = [0x66, 0x67, 0xF0, 0x2E, 0x3E, 0x26, 0x64, 0x65]
        for _ in range(n_prefix):
            b = int(rng.choice(choices))
            if b == 0x66:
                osize16 = True
            if b == 0x67:
                asize16 = True
            out.append(b)
            expected_prefix += 1

    # pick an opcode with a plain mnemonic
    candidates = [(op, spec) for op, spec in profile.one_byte.items()
                  if spec.mnemonic is not None and spec.imm != "moffs"]
    op, spec = candidates[int(rng.randint(len(candidates)))]
    out.append(op)
    body = 1

    if spec.modrm:
        mod = int(rng.randint(0, 4))
        reg = int(rng.randint(0, 8))
        rm = int(rng.randint(0, 8))
        out.append((mod << 6) | (reg << 3) | rm)
        body += 1
        if mod != 3:
            if asize16:
                if mod == 1:
                    out.append(int(rng.randint(0, 256))); body += 1
                elif mod == 2 or (mod == 0 and rm == 6):
                    out.extend(rng.randint(0, 256, 2).astype(np.uint8).tobytes()); body += 2
            else:
                if rm == 4:
                    base = int(rng.randint(0, 8))
                    out.append((base | (int(rng.randint(0, 8)) << 3))); body += 1
                    if mod == 0 and base == 5:
                        out.extend(rng.randint(0, 256, 4).astype(np.uint8).tobytes()); body += 4
                elif mod == 0 and rm == 5:
                    out.extend(rng.randint(0, 256, 4).astype(np.uint8).tobytes()); body += 4
                if mod == 1:
                    out.append(int(rng.randint(0, 256))); body += 1
                elif mod == 2:
                    out.extend(rng.randint(0, 256, 4).astype(np.uint8).tobytes()); body += 4

    imm = spec.imm
    if imm == "ib" or imm == "rel8":
        out.append(int(rng.randint(0, 256))); body += 1
    elif imm == "iw":
        out.extend(b"\x11\x22"); body += 2
    elif imm == "enter":
        out.extend(b"\x11\x22\x33"); body += 3
    elif imm == "iz" or imm == "relz":
        n = 2 if osize16 else 4
        out.extend(bytes(range(0x41, 0x41 + n))); body += n
    elif imm == "ptr":
        n = 4 if osize16 else 6
        out.extend(bytes(range(0x41, 0x41 + n))); body += n

    return bytes(out), expected_prefix + body


def test_length_soundness_over_generated_instructions():
    profile = default_profile()
    rng = np.random.RandomState(1234)
    checked = 0
    for _ in range(4000):
        code, expected_length = _random_instruction(rng, profile)
        if expected_length > MAX_INSTRUCTION_LENGTH:
            continue
        decoded = decode_one(code + b"\x90" * 4, 0)  # padding never alters length
        assert decoded is not None, code.hex()
        assert decoded.length == expected_length, code.hex()
        checked += 1
    assert checked > 3500
