/**
 * raggedcore bindings: consume and produce array packages from TypeScript.
 *
 * A package is a directory of `form.json` + `manifest.json` + one
 * little-endian `.raw` file per buffer, exactly as the primary engine writes
 * it. This module reads and writes that layout directly, and drives the
 * primary's CLI (`python -m raggedcore build`) to build packages from JSON
 * lines. All exported buffer views alias the loaded bytes; nothing here
 * copies buffer contents.
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import {
  Form,
  Primitive,
  bufferSpecs,
  formToJson,
  parseForm,
} from "./forms.js";

export {
  Form,
  NumpyForm,
  ListOffsetForm,
  RecordForm,
  Primitive,
  parseForm,
  formToJson,
  bufferSpecs,
} from "./forms.js";

export interface ArrayPackage {
  form: Form;
  length: number;
  /** name -> raw little-endian bytes; views alias their backing ArrayBuffer */
  buffers: Map<string, Uint8Array>;
}

export type TypedView =
  | Int32Array
  | BigInt64Array
  | Uint32Array
  | Float32Array
  | Float64Array
  | Uint8Array;

const TYPED_CTORS: Record<Primitive, new (b: ArrayBuffer, o: number, n: number) => TypedView> = {
  int32: Int32Array,
  int64: BigInt64Array,
  uint32: Uint32Array,
  float32: Float32Array,
  float64: Float64Array,
  bool: Uint8Array,
};

/** Read a whole file into a freshly allocated (hence 8-aligned) buffer. */
function readAligned(file: string): Uint8Array {
  const size = fs.statSync(file).size;
  const view = new Uint8Array(new ArrayBuffer(size));
  const fd = fs.openSync(file, "r");
  try {
    let pos = 0;
    while (pos < size) {
      const n = fs.readSync(fd, view, pos, size - pos, pos);
      if (n <= 0) throw new Error(`short read on ${file}`);
      pos += n;
    }
  } finally {
    fs.closeSync(fd);
  }
  return view;
}

/** Read a package directory; buffers come back bit-exact. */
export function read_package(directory: string): ArrayPackage {
  const manifestPath = path.join(directory, "manifest.json");
  if (!fs.existsSync(manifestPath)) {
    throw new Error(`missing manifest.json in ${directory}`);
  }
  let manifest: { length: number; buffers: string[] };
  try {
    manifest = JSON.parse(fs.readFileSync(manifestPath, "utf8"));
  } catch (err) {
    throw new Error(`corrupt manifest.json: ${(err as Error).message}`);
  }
  if (typeof manifest.length !== "number" || !Array.isArray(manifest.buffers)) {
    throw new Error('manifest.json must carry an integer "length" and a "buffers" list');
  }
  const form = parseForm(fs.readFileSync(path.join(directory, "form.json"), "utf8"));

  const buffers = new Map<string, Uint8Array>();
  for (const name of manifest.buffers) {
    const raw = path.join(directory, `${name}.raw`);
    if (!fs.existsSync(raw)) {
      throw new Error(`buffer file "${name}.raw" listed in manifest is missing`);
    }
    buffers.set(name, readAligned(raw));
  }
  for (const spec of bufferSpecs(form)) {
    const data = buffers.get(spec.name);
    if (data !== undefined && data.byteLength % spec.width !== 0) {
      throw new Error(
        `buffer "${spec.name}" has ${data.byteLength} bytes, not a multiple of ${spec.width}`,
      );
    }
  }
  return { form, length: manifest.length, buffers };
}

/** Write a package directory in the primary's on-disk layout. */
export function write_package(pkg: ArrayPackage, directory: string): string {
  fs.mkdirSync(directory, { recursive: true });
  fs.writeFileSync(path.join(directory, "form.json"), formToJson(pkg.form) + "\n");
  const manifest = { length: pkg.length, buffers: [...pkg.buffers.keys()] };
  fs.writeFileSync(
    path.join(directory, "manifest.json"),
    JSON.stringify(manifest, null, 2) + "\n",
  );
  for (const [name, data] of pkg.buffers) {
    fs.writeFileSync(path.join(directory, `${name}.raw`), data);
  }
  return directory;
}

/** Dtype-appropriate view over a buffer: same ArrayBuffer, no copy. */
export function typed_view(pkg: ArrayPackage, name: string): TypedView {
  const data = pkg.buffers.get(name);
  if (data === undefined) {
    throw new Error(`no buffer named "${name}" (have: ${[...pkg.buffers.keys()].join(", ")})`);
  }
  const spec = bufferSpecs(pkg.form).find((s) => s.name === name);
  if (spec === undefined) {
    throw new Error(`buffer "${name}" is not referenced by the form`);
  }
  const ctor = spec.kind === "offsets" ? BigInt64Array : TYPED_CTORS[spec.primitive!];
  return new ctor(
    data.buffer as ArrayBuffer,
    data.byteOffset,
    data.byteLength / spec.width,
  );
}

// ---------------------------------------------------------------------------
// driving the primary

const PYTHON = process.env.RAGGEDCORE_PYTHON ?? "python3";

/** Run a primary CLI subcommand; throws with stderr attached on failure. */
export function run_primary(args: string[]): string {
  const proc = spawnSync(PYTHON, ["-m", "raggedcore", ...args], { encoding: "utf8" });
  if (proc.error) {
    throw new Error(`failed to launch primary CLI: ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    throw new Error(
      `primary CLI exited ${proc.status}: ${(proc.stderr ?? "").trim() || proc.stdout}`,
    );
  }
  return proc.stdout;
}

/**
 * A built package handle: form text, length, and per-buffer views that alias
 * the loaded package bytes (no copies; treat them as read-only).
 */
export class BoundPackage {
  constructor(
    readonly packageDir: string,
    readonly formText: string,
    private readonly pkg: ArrayPackage,
  ) {}

  get length(): number {
    return this.pkg.length;
  }

  get form(): Form {
    return this.pkg.form;
  }

  bufferNames(): string[] {
    return [...this.pkg.buffers.keys()];
  }

  /** The raw byte view for a buffer: the stored object itself. */
  view(name: string): Uint8Array {
    const data = this.pkg.buffers.get(name);
    if (data === undefined) {
      throw new Error(`no buffer named "${name}" (have: ${this.bufferNames().join(", ")})`);
    }
    return data;
  }

  /** Dtype-appropriate view over the same ArrayBuffer as view(name). */
  typed(name: string): TypedView {
    return typed_view(this.pkg, name);
  }
}

/**
 * Drive the primary's typed builder over JSON lines and export the result.
 *
 * Writes the form and lines to a scratch directory, runs
 * `raggedcore build`, and loads the produced package.
 */
export function build_and_export(formText: string, jsonLines: string): BoundPackage {
  parseForm(formText); // reject unsupported forms before invoking the primary
  const scratch = fs.mkdtempSync(path.join(os.tmpdir(), "raggedcore-"));
  const formPath = path.join(scratch, "form.json");
  const linesPath = path.join(scratch, "data.jsonl");
  const outDir = path.join(scratch, "pkg");
  fs.writeFileSync(formPath, formText);
  fs.writeFileSync(linesPath, jsonLines);
  run_primary(["build", formPath, linesPath, outDir]);
  const pkg = read_package(outDir);
  const written = fs.readFileSync(path.join(outDir, "form.json"), "utf8");
  return new BoundPackage(outDir, written, pkg);
}

/**
 * Write foreign form + buffers as a package directory the primary can load.
 *
 * Only the supported node classes are accepted; anything else (option,
 * indexed, union nodes) throws naming the class.
 */
export function import_package(
  formText: string,
  length: number,
  buffers: Map<string, Uint8Array> | Record<string, Uint8Array>,
  outDir?: string,
): string {
  const form = parseForm(formText);
  const map =
    buffers instanceof Map ? buffers : new Map(Object.entries(buffers));
  for (const spec of bufferSpecs(form)) {
    if (!map.has(spec.name)) {
      throw new Error(`missing buffer "${spec.name}"`);
    }
  }
  const directory =
    outDir ?? fs.mkdtempSync(path.join(os.tmpdir(), "raggedcore-import-"));
  return write_package({ form, length, buffers: map }, directory);
}
