import { describe, expect, it } from "vitest";

import { SchemaValidator } from "../src/validator.js";

describe("schema validator subset", () => {
  it("distinguishes integers from numbers", () => {
    const v = new SchemaValidator({ type: "integer" });
    expect(v.isValid(3)).toBe(true);
    expect(v.isValid(3.5)).toBe(false);
  });

  it("supports type unions", () => {
    const v = new SchemaValidator({ type: ["integer", "null"] });
    expect(v.isValid(null)).toBe(true);
    expect(v.isValid(1)).toBe(true);
    expect(v.isValid("x")).toBe(false);
  });

  it("enforces closed objects", () => {
    const v = new SchemaValidator({
      type: "object",
      properties: { a: { type: "number" } },
      required: ["a"],
      additionalProperties: false,
    });
    expect(v.isValid({ a: 1 })).toBe(true);
    expect(v.isValid({ a: 1, b: 2 })).toBe(false);
    expect(v.isValid({})).toBe(false);
  });

  it("enforces array bounds and item schemas", () => {
    const v = new SchemaValidator({
      type: "array", items: { type: "number" }, minItems: 3, maxItems: 3,
    });
    expect(v.isValid([1, 2, 3])).toBe(true);
    expect(v.isValid([1, 2])).toBe(false);
    expect(v.isValid([1, 2, "x"])).toBe(false);
  });

  it("requires exactly one oneOf branch", () => {
    const v = new SchemaValidator({
      oneOf: [
        { type: "object", properties: { kind: { const: "a" } }, required: ["kind"] },
        { type: "object", properties: { kind: { const: "b" } }, required: ["kind"] },
      ],
    });
    expect(v.isValid({ kind: "a" })).toBe(true);
    expect(v.isValid({ kind: "c" })).toBe(false);
  });

  it("resolves local definitions", () => {
    const v = new SchemaValidator({
      definitions: { pair: { type: "array", minItems: 2, maxItems: 2 } },
      type: "object",
      properties: { p: { $ref: "#/definitions/pair" } },
    });
    expect(v.isValid({ p: [1, 2] })).toBe(true);
    expect(v.isValid({ p: [1] })).toBe(false);
  });

  it("checks enum, const and minimum", () => {
    const v = new SchemaValidator({
      type: "object",
      properties: {
        mode: { enum: ["on", "off"] },
        version: { const: 2 },
        count: { type: "integer", minimum: 0 },
      },
    });
    expect(v.isValid({ mode: "on", version: 2, count: 0 })).toBe(true);
    expect(v.isValid({ mode: "maybe" })).toBe(false);
    expect(v.isValid({ version: 3 })).toBe(false);
    expect(v.isValid({ count: -1 })).toBe(false);
  });
});
