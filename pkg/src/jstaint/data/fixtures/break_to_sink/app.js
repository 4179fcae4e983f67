function foo() {
  return location.hash;
}

function processInput(data) {
  eval(data);
}

function run(cb) {
  var callbacks = [];
  callbacks.push(cb);
  var result = callbacks[0]();
  processInput(result);
}

run(foo);
