/**
 * Minimal JSON Schema (draft-07) validator covering the subset the
 * simulator's shipped schema documents use: type / const / enum / required /
 * properties / additionalProperties:false / items / minItems / maxItems /
 * minimum / oneOf / definitions + local $ref.  Returns a list of problems,
 * empty when the instance validates.
 */

type Json = unknown;
type Schema = Record<string, unknown>;

function typeMatches(expected: string, value: Json): boolean {
  switch (expected) {
    case "object":
      return typeof value === "object" && value !== null && !Array.isArray(value);
    case "array":
      return Array.isArray(value);
    case "string":
      return typeof value === "string";
    case "number":
      return typeof value === "number";
    case "integer":
      return typeof value === "number" && Number.isInteger(value);
    case "boolean":
      return typeof value === "boolean";
    case "null":
      return value === null;
    default:
      return false;
  }
}

export class SchemaValidator {
  constructor(private readonly root: Schema) {}

  validate(instance: Json): string[] {
    return this.check(this.root, instance, "$");
  }

  isValid(instance: Json): boolean {
    return this.validate(instance).length === 0;
  }

  private resolve(schema: Schema): Schema {
    const ref = schema.$ref as string | undefined;
    if (ref === undefined) return schema;
    if (!ref.startsWith("#/")) throw new Error(`unsupported $ref: ${ref}`);
    let node: unknown = this.root;
    for (const part of ref.slice(2).split("/")) {
      node = (node as Record<string, unknown>)[part];
      if (node === undefined) throw new Error(`dangling $ref: ${ref}`);
    }
    return node as Schema;
  }

  private check(schema: Schema, value: Json, path: string): string[] {
    schema = this.resolve(schema);
    const problems: string[] = [];

    const oneOf = schema.oneOf as Schema[] | undefined;
    if (oneOf !== undefined) {
      const matches = oneOf.filter((sub) => this.check(sub, value, path).length === 0);
      if (matches.length !== 1) {
        problems.push(`${path}: matches ${matches.length} of the oneOf branches`);
      }
    }

    const type = schema.type as string | string[] | undefined;
    if (type !== undefined) {
      const allowed = Array.isArray(type) ? type : [type];
      if (!allowed.some((t) => typeMatches(t, value))) {
        problems.push(`${path}: expected ${allowed.join("|")}`);
        return problems;
      }
    }

    if ("const" in schema && value !== schema.const) {
      problems.push(`${path}: expected const ${JSON.stringify(schema.const)}`);
    }
    const allowedValues = schema.enum as Json[] | undefined;
    if (allowedValues && !allowedValues.some((v) => v === value)) {
      problems.push(`${path}: not in enum`);
    }
    if (typeof value === "number") {
      const minimum = schema.minimum as number | undefined;
      if (minimum !== undefined && value < minimum) {
        problems.push(`${path}: ${value} < minimum ${minimum}`);
      }
    }

    if (Array.isArray(value)) {
      const minItems = schema.minItems as number | undefined;
      const maxItems = schema.maxItems as number | undefined;
      if (minItems !== undefined && value.length < minItems) {
        problems.push(`${path}: fewer than ${minItems} items`);
      }
      if (maxItems !== undefined && value.length > maxItems) {
        problems.push(`${path}: more than ${maxItems} items`);
      }
      const items = schema.items as Schema | undefined;
      if (items) {
        value.forEach((item, i) => {
          problems.push(...this.check(items, item, `${path}[${i}]`));
        });
      }
    }

    if (typeof value === "object" && value !== null && !Array.isArray(value)) {
      const obj = value as Record<string, Json>;
      const properties = (schema.properties ?? {}) as Record<string, Schema>;
      const required = (schema.required ?? []) as string[];
      for (const name of required) {
        if (!(name in obj)) problems.push(`${path}: missing required ${name}`);
      }
      for (const [name, sub] of Object.entries(properties)) {
        if (name in obj) {
          problems.push(...this.check(sub, obj[name], `${path}.${name}`));
        }
      }
      const additional = schema.additionalProperties;
      if (additional === false) {
        for (const name of Object.keys(obj)) {
          if (!(name in properties)) problems.push(`${path}: unexpected property ${name}`);
        }
      } else if (typeof additional === "object" && additional !== null) {
        for (const [name, sub] of Object.entries(obj)) {
          if (!(name in properties)) {
            problems.push(...this.check(additional as Schema, sub, `${path}.${name}`));
          }
        }
      }
    }
    return problems;
  }
}
