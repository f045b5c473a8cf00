#!/usr/bin/env node
/**
 * Adapter CLI: run the bundled detector or scene classifier over a capture
 * archive, emitting the analytics pipeline's JSON-lines file formats.
 *
 *   adapter detect --archive <root> --out detections.jsonl [--stride 30]
 *   adapter scenes --archive <root> --out scenes.jsonl [--seed 0]
 */

import { DEFAULT_STRIDE, classifyScenes, detectArchive } from "./emit.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near ${key}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function required(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (!value) throw new Error(`--${name} is required`);
  return value;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "detect") {
      const flags = parseFlags(rest);
      const stats = detectArchive(
        required(flags, "archive"),
        required(flags, "out"),
        flags.has("stride") ? parseInt(flags.get("stride")!, 10) : DEFAULT_STRIDE,
      );
      console.log(JSON.stringify(stats));
      return 0;
    }
    if (command === "scenes") {
      const flags = parseFlags(rest);
      const stats = classifyScenes(
        required(flags, "archive"),
        required(flags, "out"),
        flags.has("seed") ? parseInt(flags.get("seed")!, 10) : 0,
      );
      console.log(JSON.stringify(stats));
      return 0;
    }
    console.error("usage: adapter <detect|scenes> --archive <root> --out <file>");
    return 2;
  } catch (err) {
    console.error(JSON.stringify({ error: String(err) }));
    return 1;
  }
}

const isDirectRun = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
