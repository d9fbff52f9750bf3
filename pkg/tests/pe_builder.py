"""Builds minimal 32-bit PE images for tests.

Field offsets follow the PE/COFF layout: DOS header with e_lfanew at
0x3C, PE signature, 20-byte COFF header, PE32 optional header (magic
0x10B), then 40-byte section headers.
"""

from __future__ import annotations

import struct

MACHINE_I386 = 0x014C
OPTIONAL_HEADER_SIZE = 224
SECTION_EXECUTE = 0x60000020  # code | execute | read


def build_pe(sections, machine: int = MACHINE_I386, opt_magic: int = 0x010B) -> bytes:
    """sections: list of (name, data, characteristics)."""
    pe_offset = 0x40
    dos = bytearray(0x40)
    dos[0:2] = b"MZ"
    struct.pack_into("<I", dos, 0x3C, pe_offset)

    coff = struct.pack(
        "<HHIIIHH",
        machine,
        len(sections),
        0,  # timestamp
        0,  # symbol table
        0,  # symbol count
        OPTIONAL_HEADER_SIZE,
        0x0102,  # executable, 32-bit
    )

    opt = bytearray(OPTIONAL_HEADER_SIZE)
    struct.pack_into("<H", opt, 0, opt_magic)
    struct.pack_into("<I", opt, 16, 0x1000)  # entry point rva

    headers_end = pe_offset + 4 + len(coff) + OPTIONAL_HEADER_SIZE + 40 * len(sections)
    data_start = (headers_end + 0x1FF) & ~0x1FF

    table = bytearray()
    blobs = bytearray()
    offset = data_start
    rva = 0x1000
    for name, data, characteristics in sections:
        header = bytearray(40)
        header[0:8] = name.encode("ascii")[:8].ljust(8, b"\0")
        struct.pack_into("<I", header, 8, len(data))       # virtual size
        struct.pack_into("<I", header, 12, rva)            # virtual address
        struct.pack_into("<I", header, 16, len(data))      # raw size
        struct.pack_into("<I", header, 20, offset if data else 0)
        struct.pack_into("<I", header, 36, characteristics)
        table.extend(header)
        blobs.extend(data)
        offset += len(data)
        rva += max((len(data) + 0xFFF) & ~0xFFF, 0x1000)

    image = bytearray()
    image.extend(dos)
    image.extend(b"PE\0\0")
    image.extend(coff)
    image.extend(opt)
    image.extend(table)
    image.extend(b"\0" * (data_start - len(image)))
    image.extend(blobs)
    return bytes(image)


def text_only_pe(code: bytes, machine: int = MACHINE_I386) -> bytes:
    return build_pe([(".text", code, SECTION_EXECUTE)], machine=machine)
