package main

import (
	"fmt"
	"unsafe"

	"example.com/fast"
)

func main() {
	var x int64
	fmt.Println(unsafe.Sizeof(x), fast.Len("abc"))
}
