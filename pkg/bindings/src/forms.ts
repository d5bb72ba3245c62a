/**
 * Form JSON: the structural description half of an array package.
 *
 * Three node classes are supported: NumpyArray (typed leaf), ListOffsetArray
 * (int64 offsets over a child), RecordArray (named parallel children). Every
 * node carries a unique form_key; buffer names derive from it as
 * `{form_key}-data` / `{form_key}-offsets`.
 */

export type Primitive = "int32" | "int64" | "uint32" | "float32" | "float64" | "bool";

export interface NumpyForm {
  class: "NumpyArray";
  primitive: Primitive;
  form_key: string;
}

export interface ListOffsetForm {
  class: "ListOffsetArray";
  offsets: "i64";
  content: Form;
  form_key: string;
}

export interface RecordForm {
  class: "RecordArray";
  fields: string[];
  contents: Form[];
  form_key: string;
}

export type Form = NumpyForm | ListOffsetForm | RecordForm;

export const PRIMITIVE_WIDTHS: Record<Primitive, number> = {
  int32: 4,
  int64: 8,
  uint32: 4,
  float32: 4,
  float64: 8,
  bool: 1,
};

function parseNode(obj: unknown, seen: Set<string>): Form {
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error("form node must be a JSON object");
  }
  const node = obj as Record<string, unknown>;
  const cls = node["class"];
  const key = node["form_key"];
  if (typeof key !== "string" || key.length === 0) {
    throw new Error(`form node (${String(cls)}) requires a non-empty "form_key"`);
  }
  if (seen.has(key)) {
    throw new Error(`duplicate form_key "${key}"`);
  }
  seen.add(key);

  if (cls === "NumpyArray") {
    const primitive = node["primitive"];
    if (typeof primitive !== "string" || !(primitive in PRIMITIVE_WIDTHS)) {
      throw new Error(`unsupported primitive "${String(primitive)}"`);
    }
    return { class: "NumpyArray", primitive: primitive as Primitive, form_key: key };
  }
  if (cls === "ListOffsetArray") {
    if (node["offsets"] !== "i64") {
      throw new Error(`unsupported offsets type "${String(node["offsets"])}" (only "i64")`);
    }
    return {
      class: "ListOffsetArray",
      offsets: "i64",
      content: parseNode(node["content"], seen),
      form_key: key,
    };
  }
  if (cls === "RecordArray") {
    const fields = node["fields"];
    const contents = node["contents"];
    if (!Array.isArray(fields) || !fields.every((f) => typeof f === "string")) {
      throw new Error("RecordArray fields must be a list of strings");
    }
    if (!Array.isArray(contents) || contents.length !== fields.length) {
      throw new Error("RecordArray contents must parallel fields");
    }
    return {
      class: "RecordArray",
      fields: fields as string[],
      contents: contents.map((c) => parseNode(c, seen)),
      form_key: key,
    };
  }
  throw new Error(`unsupported form class "${String(cls)}"`);
}

/** Parse and check form JSON; field order within nodes is not significant. */
export function parseForm(text: string): Form {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new Error(`form JSON parse error: ${(err as Error).message}`);
  }
  return parseNode(obj, new Set());
}

function canonicalize(form: Form): Record<string, unknown> {
  // Field order: class, per-class fields, form_key (matches the primary's output).
  switch (form.class) {
    case "NumpyArray":
      return { class: "NumpyArray", primitive: form.primitive, form_key: form.form_key };
    case "ListOffsetArray":
      return {
        class: "ListOffsetArray",
        offsets: "i64",
        content: canonicalize(form.content),
        form_key: form.form_key,
      };
    case "RecordArray":
      return {
        class: "RecordArray",
        fields: form.fields,
        contents: form.contents.map(canonicalize),
        form_key: form.form_key,
      };
  }
}

/** Canonical two-space-indented form JSON. */
export function formToJson(form: Form): string {
  return JSON.stringify(canonicalize(form), null, 2);
}

export interface BufferSpec {
  name: string;
  width: number;
  kind: "data" | "offsets";
  primitive?: Primitive;
}

/** Buffer names and element widths required by a form, in pre-order. */
export function bufferSpecs(form: Form): BufferSpec[] {
  const out: BufferSpec[] = [];
  const walk = (f: Form): void => {
    if (f.class === "NumpyArray") {
      out.push({
        name: `${f.form_key}-data`,
        width: PRIMITIVE_WIDTHS[f.primitive],
        kind: "data",
        primitive: f.primitive,
      });
    } else if (f.class === "ListOffsetArray") {
      out.push({ name: `${f.form_key}-offsets`, width: 8, kind: "offsets" });
      walk(f.content);
    } else {
      for (const c of f.contents) walk(c);
    }
  };
  walk(form);
  return out;
}
