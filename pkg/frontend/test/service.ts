/**
 * Spawns the simulator service for end-to-end tests and reports the port it
 * bound.  The service is the real CLI entry point; environment overrides
 * configure the motion limits per test.
 */

import { ChildProcess, spawn } from "node:child_process";

export interface RunningService {
  port: number;
  stop: () => void;
}

export function startService(env: Record<string, string> = {}):
    Promise<RunningService> {
  return new Promise((resolve, reject) => {
    const child: ChildProcess = spawn(
      "python3", ["-m", "clawquad.cli", "serve", "--bind", "127.0.0.1:0"],
      { env: { ...process.env, ...env }, stdio: ["ignore", "pipe", "pipe"] });

    let stdout = "";
    let settled = false;
    const timer = setTimeout(() => {
      if (!settled) {
        settled = true;
        child.kill();
        reject(new Error(`service did not come up; output so far: ${stdout}`));
      }
    }, 15000);

    child.stdout!.on("data", (chunk: Buffer) => {
      stdout += chunk.toString();
      const match = stdout.match(/serving on 127\.0\.0\.1:(\d+)/);
      if (match && !settled) {
        settled = true;
        clearTimeout(timer);
        resolve({
          port: Number(match[1]),
          stop: () => child.kill("SIGTERM"),
        });
      }
    });
    child.on("exit", (code) => {
      if (!settled) {
        settled = true;
        clearTimeout(timer);
        reject(new Error(`service exited early (${code}): ${stdout}`));
      }
    });
  });
}
