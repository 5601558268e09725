"""Writes the golden NIfTI-1 fixtures used by tests/io_golden.rs.

Run from this directory: python3 make_golden.py
Output is deterministic (gzip mtime fixed to 0).
"""

import gzip
import struct

DT = {"i16": (4, 16, "h"), "f32": (16, 32, "f"), "f64": (64, 64, "d")}


def nifti(dims, dtype, values, endian, pixdim=(1.0, 1.0, 1.0), slope=0.0, inter=0.0, ndim=3):
    e = "<" if endian == "le" else ">"
    code, bitpix, fmt = DT[dtype]
    hdr = bytearray(348)
    struct.pack_into(e + "i", hdr, 0, 348)
    dim = [ndim, *dims, 1, 1, 1, 1][:8]
    struct.pack_into(e + "8h", hdr, 40, *dim)
    struct.pack_into(e + "hh", hdr, 70, code, bitpix)
    struct.pack_into(e + "8f", hdr, 76, 1.0, *pixdim, 0.0, 0.0, 0.0, 0.0)
    struct.pack_into(e + "fff", hdr, 108, 352.0, slope, inter)
    hdr[344:348] = b"n+1\0"
    payload = struct.pack(e + str(len(values)) + fmt, *values)
    return bytes(hdr) + b"\0\0\0\0" + payload


def write(name, data):
    if name.endswith(".gz"):
        with open(name, "wb") as raw:
            with gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as f:
                f.write(data)
    else:
        with open(name, "wb") as f:
            f.write(data)


write("f32_le.nii", nifti((2, 2, 2), "f32", [float(v) for v in range(1, 9)], "le", (0.5, 0.75, 2.0)))
write("f32_be.nii.gz", nifti((3, 2, 2), "f32", [k * 0.25 - 1.0 for k in range(12)], "be"))
write("f32_le_4d.nii", nifti((2, 1, 2), "f32", [-1.5, 0.0, 2.5, 1e6], "le", ndim=4))
write("i16_le_scaled.nii.gz", nifti((2, 2, 2), "i16", list(range(-3, 5)), "le", slope=2.0, inter=10.0))
write("i16_be.nii", nifti((4, 1, 2), "i16", [-32768, -1, 0, 1, 7, 100, 32767, 12], "be", (1.0, 1.0, 3.0)))
write("f64_le.nii", nifti((2, 3, 1), "f64", [0.1, -2.5, 1e300, -0.0, 3.141592653589793, 1.0 / 3.0], "le"))
write("f64_be.nii.gz", nifti((1, 1, 3), "f64", [1.5, -7.25, 1e-300], "be", (0.93, 0.93, 0.5)))
