#!/usr/bin/env node

/**
 * Command-line entry point: run an export job described by a JSON config.
 *
 *     uqfilter-export job.json [--out-dir DIR]
 *
 * Exits 2 when the job file is missing or unreadable, 1 when the config
 * fails validation or training diverges.
 */

import * as fs from 'fs';
import { parseArgs } from 'util';
import { ZodError } from 'zod';

import { parseJob, runExportJob } from './job';
import { TrainingDivergedError } from './train';

const USAGE = 'usage: uqfilter-export <job.json> [--out-dir DIR]';

export async function main(argv: string[]): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        'out-dir': { type: 'string' },
        help: { type: 'boolean', short: 'h' },
      },
      allowPositionals: true,
    });
  } catch (e) {
    console.error(`${e instanceof Error ? e.message : e}\n${USAGE}`);
    return 2;
  }
  if (parsed.values.help) {
    console.log(USAGE);
    return 0;
  }
  if (parsed.positionals.length !== 1) {
    console.error(USAGE);
    return 2;
  }
  const jobPath = parsed.positionals[0];
  let rawText: string;
  try {
    rawText = fs.readFileSync(jobPath, 'utf-8');
  } catch (e) {
    console.error(`cannot read job file ${jobPath}: ${e instanceof Error ? e.message : e}`);
    return 2;
  }
  let raw: unknown;
  try {
    raw = JSON.parse(rawText);
  } catch (e) {
    console.error(`job file ${jobPath} is not valid JSON: ${e instanceof Error ? e.message : e}`);
    return 1;
  }
  if (parsed.values['out-dir'] !== undefined) {
    raw = { ...(raw as Record<string, unknown>), outDir: parsed.values['out-dir'] };
  }
  try {
    const job = parseJob(raw);
    const result = await runExportJob(job);
    console.log(`wrote ${result.extraction.train.file} (${result.extraction.train.dataset.labels.length} samples)`);
    console.log(`wrote ${result.extraction.test.file} (${result.extraction.test.dataset.labels.length} samples)`);
    for (const split of result.extraction.corrupted) {
      console.log(`wrote ${split.file} (${split.dataset.labels.length} samples, `
        + `${split.dataset.corruptionTag} s${split.dataset.severity})`);
    }
    console.log(`wrote ${result.trained.file}`);
    console.log(`wrote ${result.manifestFile}`);
    const losses = result.trained.lossHistory.map((l) => l.toFixed(4)).join(' ');
    console.log(`train loss by epoch: ${losses}`);
    console.log(`float micro-F1 on test split: ${result.trained.floatMicroF1.toFixed(4)}`);
    return 0;
  } catch (e) {
    if (e instanceof ZodError) {
      const issues = e.issues.map((issue) => `  ${issue.path.join('.') || '(root)'}: ${issue.message}`);
      console.error(`invalid job config:\n${issues.join('\n')}`);
      return 1;
    }
    if (e instanceof TrainingDivergedError) {
      console.error(e.message);
      return 1;
    }
    console.error(`${e instanceof Error ? e.message : e}`);
    return 1;
  }
}

if (require.main === module) {
  main(process.argv.slice(2))
    .then((code) => {
      process.exitCode = code;
    })
    .catch((e) => {
      console.error(e);
      process.exitCode = 1;
    });
}
